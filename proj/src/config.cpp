#include "tdpml/error.hpp"
#include "tdpml/harness.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace tdpml {

using nlohmann::json;

std::string to_string(ExperimentKind k)
{
    switch (k) {
    case ExperimentKind::SymbolAudit: return "symbol-audit";
    case ExperimentKind::LayerCheck: return "layer-check";
    case ExperimentKind::FreqSolve: return "freq-solve";
    case ExperimentKind::TdRun: return "td-run";
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Parseval: return "parseval";
    }
    return "?";
}

ExperimentKind parse_kind(const std::string& name)
{
    for (auto k : {ExperimentKind::SymbolAudit, ExperimentKind::LayerCheck, ExperimentKind::FreqSolve,
                   ExperimentKind::TdRun, ExperimentKind::Convergence, ExperimentKind::Parseval})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

namespace {

std::string route_name(ConvergenceRoute r)
{
    switch (r) {
    case ConvergenceRoute::Mode: return "mode";
    case ConvergenceRoute::Frequency: return "frequency";
    case ConvergenceRoute::Time: return "time";
    }
    return "?";
}

ConvergenceRoute parse_route(const std::string& s)
{
    for (auto r : {ConvergenceRoute::Mode, ConvergenceRoute::Frequency, ConvergenceRoute::Time})
        if (route_name(r) == s) return r;
    throw ConfigError("convergence.route must be mode, frequency or time, got '" + s + "'");
}

// "a.b.c": v  ->  {"a": {"b": {"c": v}}}, merged with the nested form
void insert_path(json& target, const std::string& key, const json& value, const std::string& where)
{
    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    if (head.empty()) throw ConfigError("empty key segment in '" + where + "'");
    if (dot == std::string::npos) {
        if (target.contains(head)) {
            if (target[head].is_object() && value.is_object()) {
                for (auto it = value.begin(); it != value.end(); ++it) insert_path(target[head], it.key(), it.value(), where + "." + it.key());
                return;
            }
            throw ConfigError("key '" + where + "' given twice");
        }
        target[head] = json::object();
        if (value.is_object()) {
            for (auto it = value.begin(); it != value.end(); ++it) insert_path(target[head], it.key(), it.value(), where + "." + it.key());
        } else {
            target[head] = value;
        }
        return;
    }
    if (!target.contains(head)) target[head] = json::object();
    if (!target[head].is_object()) throw ConfigError("key '" + where + "' conflicts with a scalar");
    insert_path(target[head], key.substr(dot + 1), value, where);
}

json expand(const json& in)
{
    json out = json::object();
    for (auto it = in.begin(); it != in.end(); ++it) insert_path(out, it.key(), it.value(), it.key());
    return out;
}

// Pops keys off a section so leftovers can be reported as unknown.
class Section {
public:
    Section(json j, std::string name) : j_(std::move(j)), name_(std::move(name))
    {
        if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    json take(const std::string& k)
    {
        json v = j_.at(k);
        j_.erase(k);
        return v;
    }

    Section sub(const std::string& k)
    {
        if (!has(k)) return Section(json::object(), path(k));
        return Section(take(k), path(k));
    }

    template <class T>
    void read(const std::string& k, T& out)
    {
        if (!has(k)) return;
        const json v = take(k);
        try {
            out = v.get<T>();
        } catch (const json::exception&) {
            throw ConfigError("'" + path(k) + "' has the wrong type");
        }
    }

    void read_point(const std::string& k, Point2& p)
    {
        if (has(k)) p = to_point(take(k), path(k));
    }

    void read_points(const std::string& k, std::vector<Point2>& out)
    {
        if (!has(k)) return;
        const json v = take(k);
        if (!v.is_array()) throw ConfigError("'" + path(k) + "' must be a list of [x1, x3] pairs");
        out.clear();
        for (const auto& e : v) out.push_back(to_point(e, path(k)));
    }

    void read_complex(const std::string& k, cplx& z)
    {
        if (has(k)) z = to_complex(take(k), path(k));
    }

    void read_complexes(const std::string& k, std::vector<cplx>& out)
    {
        if (!has(k)) return;
        const json v = take(k);
        if (!v.is_array()) throw ConfigError("'" + path(k) + "' must be a list");
        out.clear();
        for (const auto& e : v) out.push_back(to_complex(e, path(k)));
    }

    void finish() const
    {
        if (!j_.empty()) throw ConfigError("unknown key '" + path(j_.begin().key()) + "'");
    }

private:
    std::string path(const std::string& k) const { return name_.empty() ? k : name_ + "." + k; }

    static Point2 to_point(const json& v, const std::string& where)
    {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError("'" + where + "' needs [x1, x3] pairs");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    static cplx to_complex(const json& v, const std::string& where)
    {
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        throw ConfigError("'" + where + "' needs a number or [re, im]");
    }

    json j_;
    std::string name_;
};

json points_json(const std::vector<Point2>& pts)
{
    json a = json::array();
    for (const auto& p : pts) a.push_back({p.x1, p.x3});
    return a;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json complexes_json(const std::vector<cplx>& zs)
{
    json a = json::array();
    for (auto z : zs) a.push_back(complex_json(z));
    return a;
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["experiment"] = to_string(c.kind);
    j["seed"] = c.seed;
    j["output"] = c.output_dir;
    j["media"] = {{"c", c.media.c}, {"rho0", c.media.rho0}, {"rho_e", c.media.rho_e}, {"lambda", c.media.lambda}, {"mu", c.media.mu}};
    j["geometry"] = {{"period", c.period}, {"h", c.h}, {"surface", c.surface}, {"obstacle", points_json(c.obstacle)}};
    j["pml"] = {{"sigma0", c.pml.sigma0}, {"m", c.pml.m}, {"L", c.pml.L}};
    j["source"] = {{"center", {c.source.center.x1, c.source.center.x3}}, {"radius", c.source.radius},
                   {"a", c.source.pulse.a}, {"omega0", c.source.pulse.omega0}, {"amplitude", c.source.pulse.amplitude}};
    j["time"] = {{"T", c.T}, {"steps", c.steps}};
    j["mesh"] = {{"h", c.mesh_h}};
    j["probes"] = points_json(c.probes);
    j["sweep"] = {{"L", c.sweep.L_values}, {"sigma0", c.sweep.sigma0_values}, {"mesh_h", c.sweep.mesh_sizes}};
    j["audit"] = {{"s1", c.audit.s1_values}, {"s2_min", c.audit.s2_min}, {"s2_max", c.audit.s2_max},
                  {"s2_count", c.audit.s2_count}, {"xi_max", c.audit.xi_max}, {"xi_count", c.audit.xi_count}};
    j["layer"] = {{"n", c.layer.n_values}, {"xi", c.layer.xi}, {"s", complex_json(c.layer.s)},
                  {"order_target", c.layer.order_target}, {"order_tolerance", c.layer.order_tolerance}};
    j["freq"] = {{"variants", c.freq.variants}, {"frequencies", complexes_json(c.freq.frequencies)},
                 {"coercivity_samples", c.freq.coercivity_samples}, {"coercivity_refine", c.freq.coercivity_refine},
                 {"write_fields", c.freq.write_fields}};
    j["td"] = {{"compare_contour", c.td.compare_contour}, {"contour_s2_max", c.td.contour_s2_max},
               {"contour_n_freq", c.td.contour_n_freq}, {"route_tolerance", c.td.route_tolerance},
               {"causality", c.td.causality}, {"causality_tolerance", c.td.causality_tolerance},
               {"stability", c.td.stability}, {"energy_csv", c.td.energy_csv}};
    j["convergence"] = {{"route", route_name(c.convergence.route)}, {"sweep", c.convergence.sweep},
                        {"L_ref", c.convergence.L_ref}, {"mode_s", complex_json(c.convergence.mode_s)},
                        {"mode_xi", c.convergence.mode_xi}, {"frequencies", complexes_json(c.convergence.frequencies)},
                        {"min_exponent_fraction", c.convergence.min_exponent_fraction},
                        {"max_residual_fraction", c.convergence.max_residual_fraction},
                        {"validate_reference", c.convergence.validate_reference}};
    const auto& p = c.parseval;
    j["parseval"] = {{"exp_T_ext", p.exp_T_ext}, {"exp_intervals", p.exp_intervals}, {"pulse_T_ext", p.pulse_T_ext},
                     {"pulse_intervals", p.pulse_intervals}, {"s2_max", p.s2_max}, {"n_s2", p.n_s2},
                     {"transform_s", complexes_json(p.transform_s)}, {"transform_T_ext", p.transform_T_ext},
                     {"transform_intervals", p.transform_intervals}, {"abs_tolerance", p.abs_tolerance},
                     {"rel_tolerance", p.rel_tolerance}};
    return j;
}

template <class T>
void require_increasing(const std::vector<T>& v, const std::string& name, std::size_t min_size = 1)
{
    if (v.size() < min_size)
        throw ConfigError("'" + name + "' needs at least " + std::to_string(min_size) + " value(s)");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) throw ConfigError("'" + name + "' must be strictly increasing");
}

}  // namespace

Geometry ExperimentConfig::geometry() const
{
    Geometry g;
    g.period = period;
    g.surface = Surface::parse(period, surface);
    g.h = h;
    g.obstacle = obstacle;
    return g;
}

PmlProfile ExperimentConfig::pml_profile() const { return pml_profile(pml.sigma0, pml.L); }

PmlProfile ExperimentConfig::pml_profile(double sigma0, double L) const { return {sigma0, pml.m, L, s1()}; }

void ExperimentConfig::validate() const
{
    const auto media_errors = validate_media(media);
    if (!media_errors.empty()) throw ConfigError("media: " + media_errors.front());
    if (!(T > 0.0)) throw ConfigError("time.T must be positive");
    if (steps < 1) throw ConfigError("time.steps must be at least 1");
    if (!(mesh_h > 0.0)) throw ConfigError("mesh.h must be positive");
    if (output_dir.empty()) throw ConfigError("output directory must be set");
    try {
        (void)pml_profile();
        const auto g = geometry();
        validate_geometry(g);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!(source.radius > 0.0)) throw ConfigError("source.radius must be positive");

    switch (kind) {
    case ExperimentKind::SymbolAudit:
        require_increasing(audit.s1_values, "audit.s1");
        require_increasing(sweep.sigma0_values, "sweep.sigma0");
        require_increasing(sweep.L_values, "sweep.L");
        if (audit.s1_values.front() <= 0.0) throw ConfigError("audit.s1 values must be positive");
        if (audit.s2_count < 1 || (audit.s2_count > 1 && !(audit.s2_max > audit.s2_min)))
            throw ConfigError("audit s2 grid is empty");
        if (audit.xi_count < 2 || !(audit.xi_max > 1e-3)) throw ConfigError("audit xi grid is empty");
        break;
    case ExperimentKind::LayerCheck:
        require_increasing(layer.n_values, "layer.n", 2);
        if (layer.n_values.front() < 8) throw ConfigError("layer.n values must be at least 8");
        if (!(layer.s.real() > 0.0)) throw ConfigError("layer.s needs a positive real part");
        break;
    case ExperimentKind::FreqSolve:
        if (freq.frequencies.empty()) throw ConfigError("freq.frequencies must be nonempty");
        for (auto s : freq.frequencies)
            if (!(s.real() > 0.0)) throw ConfigError("freq.frequencies need positive real parts");
        if (freq.variants.empty()) throw ConfigError("freq.variants must be nonempty");
        for (const auto& v : freq.variants) parse_variant(v);
        if (freq.coercivity_samples < 0) throw ConfigError("freq.coercivity_samples must be >= 0");
        break;
    case ExperimentKind::TdRun:
        if (td.stability) {
            require_increasing(sweep.mesh_sizes, "sweep.mesh_h");
            require_increasing(sweep.sigma0_values, "sweep.sigma0");
        }
        if (td.compare_contour && (td.contour_n_freq < 3 || td.contour_n_freq % 2 == 0))
            throw ConfigError("td.contour_n_freq must be odd and >= 3");
        break;
    case ExperimentKind::Convergence: {
        const auto& cv = convergence;
        if (cv.sweep == "L") {
            require_increasing(sweep.L_values, "sweep.L", 3);
            if (sweep.L_values.front() <= 0.0) throw ConfigError("sweep.L values must be positive");
            if (cv.route == ConvergenceRoute::Time && cv.L_ref < 3.0 * sweep.L_values.back())
                throw ConfigError("convergence.L_ref must be at least 3 times the largest swept L");
        } else if (cv.sweep == "sigma0") {
            require_increasing(sweep.sigma0_values, "sweep.sigma0", 3);
            if (sweep.sigma0_values.front() < 0.0) throw ConfigError("sweep.sigma0 values must be >= 0");
            if (cv.route == ConvergenceRoute::Time && cv.L_ref < 3.0 * pml.L)
                throw ConfigError("convergence.L_ref must be at least 3 times pml.L");
        } else {
            throw ConfigError("convergence.sweep must be 'L' or 'sigma0'");
        }
        if (cv.route == ConvergenceRoute::Mode && !(cv.mode_s.real() > 0.0))
            throw ConfigError("convergence.mode_s needs a positive real part");
        if (cv.route == ConvergenceRoute::Frequency) {
            if (cv.frequencies.empty()) throw ConfigError("convergence.frequencies must be nonempty");
            for (auto s : cv.frequencies)
                if (!(s.real() > 0.0)) throw ConfigError("convergence.frequencies need positive real parts");
        }
        break;
    }
    case ExperimentKind::Parseval: {
        const auto& p = parseval;
        if (!(p.exp_T_ext > 0.0) || !(p.pulse_T_ext > 0.0) || !(p.transform_T_ext > 0.0) || p.exp_intervals < 1 ||
            p.pulse_intervals < 1 || p.transform_intervals < 1)
            throw ConfigError("parseval grids must be nonempty");
        if (!(p.s2_max > 0.0) || p.n_s2 < 3 || p.n_s2 % 2 == 0)
            throw ConfigError("parseval.n_s2 must be odd and >= 3 with s2_max > 0");
        for (auto s : p.transform_s)
            if (!(s.real() > 0.0)) throw ConfigError("parseval.transform_s need positive real parts");
        break;
    }
    }
}

ExperimentConfig parse_config(const std::string& json_text)
{
    json raw;
    try {
        raw = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
    Section root(expand(raw), "");

    ExperimentConfig c;
    std::string kind = to_string(c.kind);
    root.read("experiment", kind);
    c.kind = parse_kind(kind);
    root.read("seed", c.seed);
    root.read("output", c.output_dir);
    {
        auto s = root.sub("media");
        s.read("c", c.media.c);
        s.read("rho0", c.media.rho0);
        s.read("rho_e", c.media.rho_e);
        s.read("lambda", c.media.lambda);
        s.read("mu", c.media.mu);
        s.finish();
    }
    {
        auto s = root.sub("geometry");
        s.read("period", c.period);
        s.read("h", c.h);
        s.read("surface", c.surface);
        s.read_points("obstacle", c.obstacle);
        s.finish();
    }
    {
        auto s = root.sub("pml");
        s.read("sigma0", c.pml.sigma0);
        s.read("m", c.pml.m);
        s.read("L", c.pml.L);
        s.finish();
    }
    {
        auto s = root.sub("source");
        s.read_point("center", c.source.center);
        s.read("radius", c.source.radius);
        s.read("a", c.source.pulse.a);
        s.read("omega0", c.source.pulse.omega0);
        s.read("amplitude", c.source.pulse.amplitude);
        s.finish();
    }
    {
        auto s = root.sub("time");
        s.read("T", c.T);
        s.read("steps", c.steps);
        s.finish();
    }
    {
        auto s = root.sub("mesh");
        s.read("h", c.mesh_h);
        s.finish();
    }
    root.read_points("probes", c.probes);
    {
        auto s = root.sub("sweep");
        s.read("L", c.sweep.L_values);
        s.read("sigma0", c.sweep.sigma0_values);
        s.read("mesh_h", c.sweep.mesh_sizes);
        s.finish();
    }
    {
        auto s = root.sub("audit");
        s.read("s1", c.audit.s1_values);
        s.read("s2_min", c.audit.s2_min);
        s.read("s2_max", c.audit.s2_max);
        s.read("s2_count", c.audit.s2_count);
        s.read("xi_max", c.audit.xi_max);
        s.read("xi_count", c.audit.xi_count);
        s.finish();
    }
    {
        auto s = root.sub("layer");
        s.read("n", c.layer.n_values);
        s.read("xi", c.layer.xi);
        s.read_complex("s", c.layer.s);
        s.read("order_target", c.layer.order_target);
        s.read("order_tolerance", c.layer.order_tolerance);
        s.finish();
    }
    {
        auto s = root.sub("freq");
        s.read("variants", c.freq.variants);
        s.read_complexes("frequencies", c.freq.frequencies);
        s.read("coercivity_samples", c.freq.coercivity_samples);
        s.read("coercivity_refine", c.freq.coercivity_refine);
        s.read("write_fields", c.freq.write_fields);
        s.finish();
    }
    {
        auto s = root.sub("td");
        s.read("compare_contour", c.td.compare_contour);
        s.read("contour_s2_max", c.td.contour_s2_max);
        s.read("contour_n_freq", c.td.contour_n_freq);
        s.read("route_tolerance", c.td.route_tolerance);
        s.read("causality", c.td.causality);
        s.read("causality_tolerance", c.td.causality_tolerance);
        s.read("stability", c.td.stability);
        s.read("energy_csv", c.td.energy_csv);
        s.finish();
    }
    {
        auto s = root.sub("convergence");
        std::string route = route_name(c.convergence.route);
        s.read("route", route);
        c.convergence.route = parse_route(route);
        s.read("sweep", c.convergence.sweep);
        s.read("L_ref", c.convergence.L_ref);
        s.read_complex("mode_s", c.convergence.mode_s);
        s.read("mode_xi", c.convergence.mode_xi);
        s.read_complexes("frequencies", c.convergence.frequencies);
        s.read("min_exponent_fraction", c.convergence.min_exponent_fraction);
        s.read("max_residual_fraction", c.convergence.max_residual_fraction);
        s.read("validate_reference", c.convergence.validate_reference);
        s.finish();
    }
    {
        auto s = root.sub("parseval");
        auto& p = c.parseval;
        s.read("exp_T_ext", p.exp_T_ext);
        s.read("exp_intervals", p.exp_intervals);
        s.read("pulse_T_ext", p.pulse_T_ext);
        s.read("pulse_intervals", p.pulse_intervals);
        s.read("s2_max", p.s2_max);
        s.read("n_s2", p.n_s2);
        s.read_complexes("transform_s", p.transform_s);
        s.read("transform_T_ext", p.transform_T_ext);
        s.read("transform_intervals", p.transform_intervals);
        s.read("abs_tolerance", p.abs_tolerance);
        s.read("rel_tolerance", p.rel_tolerance);
        s.finish();
    }
    root.finish();

    c.source.horizon = c.T;
    c.validate();
    c.canonical = to_json(c).dump();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace tdpml
