#include "tdpml/harness.hpp"

#include "tdpml/error.hpp"
#include "tdpml/layer_bvp.hpp"
#include "tdpml/parallel.hpp"
#include "tdpml/xform.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#ifndef TDPML_VERSION
#define TDPML_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace tdpml {

std::string version() { return TDPML_VERSION; }

void RunReport::fail(const std::string& why)
{
    pass = false;
    messages.push_back("FAIL: " + why);
}

// ---------------------------------------------------------------- rate fit

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& errors, double floor)
{
    if (x.size() != errors.size()) throw ConfigError("rate fit: abscissas and errors differ in length");
    RateFit f;
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (!(errors[i] < errors[i - 1])) f.monotone = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(errors[i] >= floor) || !std::isfinite(errors[i])) {
            ++f.discarded;
            continue;
        }
        f.abscissas.push_back(x[i]);
        f.log_errors.push_back(std::log(errors[i]));
    }
    const std::size_t n = f.abscissas.size();
    if (n < 3) {
        f.diagnostic = "fewer than three points above the floor " + csv_number(floor);
        return f;
    }
    const double mx = std::accumulate(f.abscissas.begin(), f.abscissas.end(), 0.0) / n;
    const double my = std::accumulate(f.log_errors.begin(), f.log_errors.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (f.abscissas[i] - mx) * (f.abscissas[i] - mx);
        sxy += (f.abscissas[i] - mx) * (f.log_errors[i] - my);
    }
    if (!(sxx > 0.0)) {
        f.diagnostic = "abscissas are all equal";
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i)
        f.residual = std::max(f.residual, std::abs(f.log_errors[i] - (f.intercept + f.slope * f.abscissas[i])));
    const auto [lo, hi] = std::minmax_element(f.log_errors.begin(), f.log_errors.end());
    const double range = *hi - *lo;
    f.residual_fraction = range > 0.0 ? f.residual / range : (f.residual > 0.0 ? INFINITY : 0.0);
    if (!f.monotone) {
        f.diagnostic = "error sequence is not strictly decreasing";
        return f;
    }
    f.accepted = true;
    return f;
}

// ---------------------------------------------------------------- CSV

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string csv_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()), out_(path)
{
    if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    if (fields.size() != columns_) throw Error("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                                              std::to_string(columns_));
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv_field(fields[i]);
    out_ << '\n';
}

namespace {

using N = std::vector<std::string>;

std::string num(double v) { return csv_number(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

std::string out_path(const ExperimentConfig& cfg, const std::string& name)
{
    return (fs::path(cfg.output_dir) / name).string();
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<double> linspace(double a, double b, int n)
{
    if (n == 1) return {0.5 * (a + b)};
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> xi_grid(double xi_max, int count)
{
    std::vector<double> g{0.0};
    const double lo = std::log(1e-3), hi = std::log(xi_max);
    for (int k = 0; k < count - 1; ++k) g.push_back(count == 2 ? xi_max : std::exp(lo + (hi - lo) * k / (count - 2)));
    return g;
}

// squared H1 norm over the solid elements of per-vertex displacement components
std::pair<double, double> solid_h1_parts(const StripMesh& mesh, const std::vector<cplx>& u1, const std::vector<cplx>& u2)
{
    double g2 = 0.0, m2 = 0.0;
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        if (mesh.regions()[e] != Region::Solid) continue;
        const auto el = element_geometry(mesh, static_cast<int>(e));
        const auto& t = mesh.triangles()[e];
        for (const auto* comp : {&u1, &u2}) {
            std::array<cplx, 3> v{(*comp)[t[0]], (*comp)[t[1]], (*comp)[t[2]]};
            cplx gx(0), gz(0);
            for (int k = 0; k < 3; ++k) {
                gx += v[k] * el.grad[k][0];
                gz += v[k] * el.grad[k][1];
            }
            g2 += el.area * (std::norm(gx) + std::norm(gz));
            const cplx sum = v[0] + v[1] + v[2];
            m2 += el.area / 12.0 * (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]) + std::norm(sum));
        }
    }
    return {g2, m2};
}

// shortest periodic distance from x to the source ball
double source_distance(const ExperimentConfig& cfg, const Point2& x)
{
    double dx = x.x1 - cfg.source.center.x1;
    dx -= cfg.period * std::round(dx / cfg.period);
    return std::hypot(dx, x.x3 - cfg.source.center.x3) - cfg.source.radius;
}

Eigen::VectorXcd random_field(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = cplx(nd(rng), nd(rng));
    return w;
}

}  // namespace

// ---------------------------------------------------------------- symbol audit

RunReport run_symbol_audit(const ExperimentConfig& cfg, int jobs)
{
    RunReport rep;
    const auto& a = cfg.audit;
    const double c = cfg.media.c;
    const auto xi = xi_grid(a.xi_max, a.xi_count);
    const auto s2 = linspace(a.s2_min, a.s2_max, a.s2_count);
    const auto& sig = cfg.sweep.sigma0_values;
    const auto& Ls = cfg.sweep.L_values;

    struct Item {
        double sigma0, L, s1, s2;
    };
    std::vector<Item> items;
    for (double sg : sig)
        for (double L : Ls)
            for (double s1 : a.s1_values)
                for (double v : s2) items.push_back({sg, L, s1, v});

    struct Outcome {
        SymbolAuditRecord worst{};
        double worst_ratio = -1.0;
        std::vector<SymbolAuditRecord> violations;
    };
    std::vector<Outcome> out(items.size());
    parallel_for(static_cast<int>(items.size()), jobs, [&](int i) {
        const auto& it = items[i];
        const auto audit = symbol_gap_sup(LaplaceFrequency(it.s1, it.s2), c, PmlProfile(it.sigma0, cfg.pml.m, it.L, it.s1), xi);
        for (const auto& r : audit.records) {
            const double ratio = r.bound > 0.0 ? r.gap / r.bound : INFINITY;
            if (ratio > out[i].worst_ratio) {
                out[i].worst_ratio = ratio;
                out[i].worst = r;
            }
            if (!r.pass) out[i].violations.push_back(r);
        }
    });

    struct Passive {
        double s1, s2, xi_min, min_value, constant;
        bool pass;
    };
    std::vector<Passive> passive(a.s1_values.size() * s2.size());
    parallel_for(static_cast<int>(passive.size()), jobs, [&](int i) {
        const double s1 = a.s1_values[i / s2.size()], v = s2[i % s2.size()];
        const auto rep_p = modal_passivity_check(LaplaceFrequency(s1, v), c, xi);
        Passive p{s1, v, 0.0, INFINITY, rep_p.empirical_constant, rep_p.pass()};
        for (const auto& r : rep_p.records)
            if (r.re_beta_over_s < p.min_value) {
                p.min_value = r.re_beta_over_s;
                p.xi_min = r.xi;
            }
        passive[i] = p;
    });

    const N header{"sigma0", "L", "s1", "s2", "xi", "beta_re", "beta_im", "gap", "bound", "pass"};
    auto record_row = [](double sg, double L, const SymbolAuditRecord& r) {
        return N{num(sg), num(L), num(r.s1), num(r.s2), num(r.xi), num(r.beta.real()), num(r.beta.imag()),
                 num(r.gap), num(r.bound), flag(r.pass)};
    };
    CsvWriter worst(out_path(cfg, "symbol_audit.csv"), header);
    CsvWriter viol(out_path(cfg, "symbol_violations.csv"), header);
    double max_ratio = 0.0;
    std::size_t n_viol = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        worst.row(record_row(items[i].sigma0, items[i].L, out[i].worst));
        max_ratio = std::max(max_ratio, out[i].worst_ratio);
        for (const auto& r : out[i].violations) {
            viol.row(record_row(items[i].sigma0, items[i].L, r));
            if (n_viol++ == 0) {
                std::ostringstream m;
                m << "gap above bound at sigma0=" << items[i].sigma0 << " L=" << items[i].L << " s=" << r.s1 << "+"
                  << r.s2 << "i xi=" << r.xi << ": gap " << r.gap << " > " << r.bound;
                rep.fail(m.str());
            }
        }
    }

    CsvWriter pcsv(out_path(cfg, "passivity.csv"),
                   {"s1", "s2", "xi_min", "min_re_beta_over_s", "empirical_constant", "pass"});
    double min_passive = INFINITY, max_constant = 0.0;
    std::size_t n_pviol = 0;
    for (const auto& p : passive) {
        pcsv.row({num(p.s1), num(p.s2), num(p.xi_min), num(p.min_value), num(p.constant), flag(p.pass)});
        min_passive = std::min(min_passive, p.min_value);
        max_constant = std::max(max_constant, p.constant);
        if (!p.pass && n_pviol++ == 0)
            rep.fail("Re(beta/s) = " + fmt(p.min_value) + " < 0 at s=" + fmt(p.s1) + "+" + fmt(p.s2) + "i xi=" + fmt(p.xi_min));
    }

    // full curves for the extreme and central s2 of every (sigma0, L, s1)
    CsvWriter curves(out_path(cfg, "symbol_curves.csv"), {"sigma0", "L", "s1", "s2", "xi", "gap", "bound"});
    std::vector<double> picks{s2.front()};
    const double central = *std::min_element(s2.begin(), s2.end(), [](double p, double q) { return std::abs(p) < std::abs(q); });
    if (central != picks.back()) picks.push_back(central);
    if (s2.back() != picks.back()) picks.push_back(s2.back());
    for (double sg : sig)
        for (double L : Ls)
            for (double s1 : a.s1_values)
                for (double v : picks) {
                    const auto au = symbol_gap_sup(LaplaceFrequency(s1, v), c, PmlProfile(sg, cfg.pml.m, L, s1), xi);
                    for (const auto& r : au.records)
                        curves.row({num(sg), num(L), num(s1), num(v), num(r.xi), num(r.gap), num(r.bound)});
                }

    rep.outputs = {worst.path(), viol.path(), pcsv.path(), curves.path()};
    rep.metrics["grid_points"] = static_cast<double>(items.size() * xi.size());
    rep.metrics["max_gap_over_bound"] = max_ratio;
    rep.metrics["violations"] = static_cast<double>(n_viol);
    rep.metrics["min_re_beta_over_s"] = min_passive;
    rep.metrics["passivity_violations"] = static_cast<double>(n_pviol);
    rep.metrics["passivity_constant"] = max_constant;
    rep.messages.push_back("symbol audit: " + std::to_string(items.size() * xi.size()) + " points, max gap/bound " +
                           fmt(max_ratio) + ", " + std::to_string(n_viol) + " violations");
    rep.messages.push_back("modal passivity: min Re(beta/s) " + fmt(min_passive) + ", empirical constant " +
                           fmt(max_constant));
    return rep;
}

// ---------------------------------------------------------------- layer check

RunReport run_layer_check(const ExperimentConfig& cfg, int jobs)
{
    RunReport rep;
    LayerMode mode;
    mode.xi = FourierMode(cfg.layer.xi);
    mode.s = LaplaceFrequency(cfg.layer.s);
    mode.c = cfg.media.c;
    mode.pml = PmlProfile(cfg.pml.sigma0, cfg.pml.m, cfg.pml.L, cfg.layer.s.real());
    mode.h = cfg.h;
    mode.phi = 1.0;
    const cplx target = pml_dtn_symbol(mode.xi, mode.s, mode.c, mode.pml.L_tilde()) * mode.phi;
    const auto& ns = cfg.layer.n_values;

    struct Row {
        double err = 0, dtn_err = 0;
        cplx mid;
    };
    std::vector<Row> rows(ns.size());
    parallel_for(static_cast<int>(ns.size()), jobs, [&](int i) {
        const auto sol = fd_layer_solve(mode, ns[i]);
        rows[i].err = layer_max_error(mode, ns[i]);
        rows[i].dtn_err = std::abs(numeric_dtn_at_h(sol) - target);
        // midpoint node exists for even n
        rows[i].mid = sol.v[sol.v.size() / 2];
    });

    CsvWriter csv(out_path(cfg, "layer_check.csv"),
                  {"n", "max_error", "order", "dtn_error", "dtn_order", "midpoint_re", "midpoint_im"});
    const double lo = cfg.layer.order_target - cfg.layer.order_tolerance,
                 hi = cfg.layer.order_target + cfg.layer.order_tolerance;
    double min_order = INFINITY, max_order = -INFINITY;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        std::string order, dorder;
        if (i > 0) {
            const double r = std::log(static_cast<double>(ns[i]) / ns[i - 1]);
            const double o = std::log(rows[i - 1].err / rows[i].err) / r;
            const double d = std::log(rows[i - 1].dtn_err / rows[i].dtn_err) / r;
            order = num(o);
            dorder = num(d);
            for (double v : {o, d}) {
                min_order = std::min(min_order, v);
                max_order = std::max(max_order, v);
            }
            if (!(o >= lo && o <= hi)) rep.fail("layer solution order " + fmt(o) + " between n=" + std::to_string(ns[i - 1]) + " and " + std::to_string(ns[i]));
            if (!(d >= lo && d <= hi)) rep.fail("numeric DtN order " + fmt(d) + " between n=" + std::to_string(ns[i - 1]) + " and " + std::to_string(ns[i]));
        }
        csv.row({num(ns[i]), num(rows[i].err), order, num(rows[i].dtn_err), dorder, num(rows[i].mid.real()),
                 num(rows[i].mid.imag())});
    }
    const cplx mid_exact = analytic_layer_solution(mode, mode.h + 0.5 * mode.pml.L());
    rep.outputs.push_back(csv.path());
    rep.metrics["min_order"] = min_order;
    rep.metrics["max_order"] = max_order;
    rep.metrics["midpoint_exact_re"] = mid_exact.real();
    rep.metrics["midpoint_fd_re"] = rows.back().mid.real();
    rep.metrics["midpoint_error"] = std::abs(rows.back().mid - mid_exact);
    rep.metrics["L_tilde"] = mode.pml.L_tilde();
    rep.messages.push_back("layer check: observed orders in [" + fmt(min_order) + ", " + fmt(max_order) + "], midpoint " +
                           fmt(rows.back().mid.real()) + " vs " + fmt(mid_exact.real()));
    return rep;
}

// ---------------------------------------------------------------- frequency solves

RunReport run_freq_solve(const ExperimentConfig& cfg, int jobs)
{
    RunReport rep;
    const auto geom = cfg.geometry();
    const auto mesh = build_mesh(geom, cfg.pml_profile(), cfg.mesh_h);
    const auto src = make_source(cfg.source, mesh);
    const double chi_norm = source_l2_norm(mesh, [&](const Point2& x) { return src.spatial(x); });
    const auto& fs_ = cfg.freq.frequencies;

    CsvWriter csv(out_path(cfg, "freq_solve.csv"), {"variant", "s_re", "s_im", "dofs", "residual", "refinements",
                                                    "fluid_ratio", "solid_ratio", "h_norm"});
    CsvWriter pcsv(out_path(cfg, "freq_probes.csv"), {"variant", "s_re", "s_im", "probe_id", "x1", "x3", "p_re", "p_im"});
    CsvWriter ccsv(out_path(cfg, "coercivity.csv"),
                   {"variant", "s_re", "s_im", "mesh_h", "samples", "min_re_a", "min_ratio", "all_positive"});
    rep.outputs = {csv.path(), pcsv.path(), ccsv.path()};

    double worst_residual = 0.0;
    for (const auto& vname : cfg.freq.variants) {
        const Variant variant = parse_variant(vname);
        const FrequencyDiscretization disc(mesh, cfg.media, variant);
        std::vector<FrequencySolution> sols(fs_.size());
        parallel_for(
            static_cast<int>(fs_.size()), jobs, [&](int) { return FrequencySolver(disc); },
            [&](FrequencySolver& solver, int i) { sols[i] = solver.solve(disc.assemble(fs_[i], src)); });
        for (std::size_t i = 0; i < fs_.size(); ++i) {
            const auto& sol = sols[i];
            const auto ratios = stability_ratios(disc, sol, std::abs(src.laplace(fs_[i])) * chi_norm);
            csv.row({vname, num(fs_[i].real()), num(fs_[i].imag()), num(static_cast<std::size_t>(sol.x.size())),
                     num(sol.residual), num(sol.refinements), num(ratios.fluid_ratio), num(ratios.solid_ratio),
                     num(std::sqrt(disc.h_norm_sq(sol.x)))});
            worst_residual = std::max(worst_residual, sol.residual);
            for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
                const cplx v = interpolate(mesh, sol.p, cfg.probes[k]);
                pcsv.row({vname, num(fs_[i].real()), num(fs_[i].imag()), num(k), num(cfg.probes[k].x1),
                          num(cfg.probes[k].x3), num(v.real()), num(v.imag())});
            }
            if (cfg.freq.write_fields) {
                const auto path = out_path(cfg, "field_" + vname + "_" + std::to_string(i) + ".txt");
                write_nodal_field(path, sol.p);
                rep.outputs.push_back(path);
            }
        }
    }

    if (cfg.freq.coercivity_samples > 0) {
        std::vector<double> hs{cfg.mesh_h};
        if (cfg.freq.coercivity_refine) hs.push_back(0.5 * cfg.mesh_h);
        for (const auto& vname : cfg.freq.variants) {
            const Variant variant = parse_variant(vname);
            std::vector<std::vector<double>> constants(hs.size(), std::vector<double>(fs_.size()));
            for (std::size_t ih = 0; ih < hs.size(); ++ih) {
                const auto m = build_mesh(geom, cfg.pml_profile(), hs[ih]);
                const FrequencyDiscretization disc(m, cfg.media, variant);
                for (std::size_t i = 0; i < fs_.size(); ++i) {
                    const int n = cfg.freq.coercivity_samples;
                    std::vector<CoercivityProbe> probes(n);
                    parallel_for(n, jobs, [&](int k) {
                        const std::uint64_t seed = cfg.seed * 1000003ull + fnv1a(vname) + 7919ull * i + 104729ull * k + ih;
                        probes[k] = coercivity_probe(disc, fs_[i], random_field(disc.dofs().size(), seed));
                    });
                    double min_re = INFINITY, min_ratio = INFINITY;
                    for (const auto& p : probes) {
                        min_re = std::min(min_re, p.re_a);
                        min_ratio = std::min(min_ratio, p.re_a / p.h_norm_sq);
                    }
                    constants[ih][i] = min_ratio;
                    const bool positive = min_re > 0.0;
                    ccsv.row({vname, num(fs_[i].real()), num(fs_[i].imag()), num(hs[ih]), num(n), num(min_re),
                              num(min_ratio), flag(positive)});
                    if (!positive) rep.fail("Re a <= 0 for " + vname + " at s=" + fmt(fs_[i].real()) + "+" + fmt(fs_[i].imag()) + "i");
                }
            }
            if (hs.size() == 2)
                for (std::size_t i = 0; i < fs_.size(); ++i) {
                    const double var = std::abs(constants[1][i] - constants[0][i]) / constants[0][i];
                    rep.metrics["coercivity_variation_" + vname + "_" + std::to_string(i)] = var;
                    if (!(var < 0.5))
                        rep.fail("coercivity constant of " + vname + " changes by " + fmt(100 * var) + "% under refinement");
                }
        }
    }
    rep.metrics["max_residual"] = worst_residual;
    rep.metrics["elements"] = static_cast<double>(mesh.triangles().size());
    if (worst_residual > 1e-10) rep.fail("linear residual " + fmt(worst_residual));
    rep.messages.push_back("frequency solves: " + std::to_string(cfg.freq.variants.size() * fs_.size()) +
                           " systems on " + std::to_string(mesh.triangles().size()) + " elements, max residual " +
                           fmt(worst_residual));
    return rep;
}

// ---------------------------------------------------------------- time-domain run

RunReport run_td(const ExperimentConfig& cfg, int jobs)
{
    RunReport rep;
    const auto geom = cfg.geometry();
    const auto mesh = build_mesh(geom, cfg.pml_profile(), cfg.mesh_h);
    const auto src = make_source(cfg.source, mesh);
    NewmarkConfig nc;
    nc.dt = cfg.dt();
    nc.T = cfg.T;
    nc.probes = cfg.probes;
    const auto traj = newmark_run(mesh, cfg.media, src, nc);

    write_probe_csv(out_path(cfg, "probes.csv"), traj.t, traj.probes);
    rep.outputs.push_back(out_path(cfg, "probes.csv"));
    double e_max = 0.0, drift = 0.0;
    for (const auto& s : traj.steps) {
        e_max = std::max(e_max, std::abs(s.energy));
        drift = std::max(drift, std::abs(s.energy - s.work));
    }
    if (cfg.td.energy_csv) {
        CsvWriter e(out_path(cfg, "energy.csv"),
                    {"t", "energy", "work", "power", "dt_p", "grad_p", "dt_u", "div_u", "grad_u"});
        for (const auto& s : traj.steps)
            e.row({num(s.t), num(s.energy), num(s.work), num(s.power), num(s.dt_p), num(s.grad_p), num(s.dt_u),
                   num(s.div_u), num(s.grad_u)});
        rep.outputs.push_back(e.path());
    }
    rep.metrics["energy_balance"] = e_max > 0.0 ? drift / e_max : drift;
    rep.metrics["field_max"] = traj.field_max;
    rep.metrics["elements"] = static_cast<double>(mesh.triangles().size());
    rep.messages.push_back("Newmark: " + std::to_string(traj.steps.size() - 1) + " steps on " +
                           std::to_string(mesh.triangles().size()) + " elements, energy balance " +
                           fmt(rep.metrics["energy_balance"]));

    if (cfg.td.compare_contour) {
        auto cc = ContourConfig::defaults(cfg.T, cfg.media.c, cfg.period, cfg.steps);
        if (cfg.td.contour_s2_max > 0.0) cc.s2_max = cfg.td.contour_s2_max;
        cc.n_freq = cfg.td.contour_n_freq;
        const FrequencyDiscretization disc(mesh, cfg.media, Variant::ExactDtn);
        const auto cr = contour_synthesize(cc, disc, src, cfg.probes, jobs);
        for (const auto& w : cr.warnings) rep.messages.push_back("contour: " + w);
        write_probe_csv(out_path(cfg, "contour_probes.csv"), cr.t, cr.probes);
        CsvWriter r(out_path(cfg, "route.csv"), {"probe_id", "x1", "x3", "relative_l2", "pass"});
        double worst = 0.0;
        for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
            const auto& a = traj.probes[k];
            const auto& b = cr.probes[k];
            double d;
            if (a.solid) {
                d = std::max(relative_l2_difference(a.u1, b.u1), relative_l2_difference(a.u2, b.u2));
            } else {
                d = relative_l2_difference(a.p, b.p);
            }
            worst = std::max(worst, d);
            const bool ok = d <= cfg.td.route_tolerance;
            r.row({num(k), num(cfg.probes[k].x1), num(cfg.probes[k].x3), num(d), flag(ok)});
            if (!ok) rep.fail("routes differ by " + fmt(100 * d) + "% at probe " + std::to_string(k));
        }
        rep.outputs.push_back(out_path(cfg, "contour_probes.csv"));
        rep.outputs.push_back(r.path());
        rep.metrics["route_difference"] = worst;
        rep.metrics["contour_self_check"] = cr.check.max_error;
        rep.messages.push_back("route consistency: max relative L2 difference " + fmt(worst));
    }

    if (cfg.td.causality) {
        if (!cfg.obstacle.empty())
            rep.messages.push_back("causality: the obstacle carries faster elastic waves; d/c is only a bound for paths in the fluid");
        CsvWriter r(out_path(cfg, "causality.csv"), {"probe_id", "x1", "x3", "distance", "t_cutoff", "ratio", "pass"});
        double worst = 0.0;
        for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
            if (traj.probes[k].solid) continue;
            const double d = source_distance(cfg, cfg.probes[k]);
            const double tc = d / cfg.media.c - 2.0 * nc.dt;
            const double ratio = tc > 0.0 ? pre_arrival_ratio(traj, k, tc) : 0.0;
            worst = std::max(worst, ratio);
            const bool ok = ratio <= cfg.td.causality_tolerance;
            r.row({num(k), num(cfg.probes[k].x1), num(cfg.probes[k].x3), num(d), num(tc), num(ratio), flag(ok)});
            if (!ok) rep.fail("pre-arrival amplitude " + fmt(ratio) + " of the field maximum at probe " + std::to_string(k));
        }
        rep.outputs.push_back(r.path());
        rep.metrics["pre_arrival_ratio"] = worst;
        rep.messages.push_back("causality: max pre-arrival ratio " + fmt(worst));
    }

    if (cfg.td.stability) {
        struct Point {
            double h, sigma0;
            EnergyTrace tr;
        };
        std::vector<Point> pts;
        for (double hh : cfg.sweep.mesh_sizes) pts.push_back({hh, cfg.pml.sigma0, {}});
        for (double sg : cfg.sweep.sigma0_values) pts.push_back({cfg.mesh_h, sg, {}});
        parallel_for(static_cast<int>(pts.size()), jobs, [&](int i) {
            const auto m = build_mesh(geom, cfg.pml_profile(pts[i].sigma0, cfg.pml.L), pts[i].h);
            const auto s = make_source(cfg.source, m);
            NewmarkConfig c2 = nc;
            c2.probes.clear();
            pts[i].tr = energy_trace(newmark_run(m, cfg.media, s, c2), m, s);
        });
        CsvWriter r(out_path(cfg, "stability.csv"),
                    {"study", "mesh_h", "sigma0", "max_fluid", "max_solid", "max_fluid_pml", "max_solid_pml"});
        const std::size_t nm = cfg.sweep.mesh_sizes.size();
        double lo = INFINITY, hi = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& t = pts[i].tr;
            r.row({i < nm ? "mesh" : "sigma0", num(pts[i].h), num(pts[i].sigma0), num(t.max_fluid), num(t.max_solid),
                   num(t.max_fluid_pml), num(t.max_solid_pml)});
            if (i < nm) {
                if (!std::isfinite(t.max_fluid) || !std::isfinite(t.max_solid)) rep.fail("energy ratio not finite");
                lo = std::min(lo, t.max_fluid);
                hi = std::max(hi, t.max_fluid);
            } else if (i > nm && t.max_fluid_pml > pts[i - 1].tr.max_fluid_pml * (1.0 + 1e-12)) {
                rep.fail("normalized PML ratio grows from sigma0=" + fmt(pts[i - 1].sigma0) + " to " + fmt(pts[i].sigma0));
            }
        }
        const double variation = lo > 0.0 ? (hi - lo) / lo : INFINITY;
        rep.metrics["stability_mesh_variation"] = variation;
        if (!(variation < 0.5)) rep.fail("fluid energy ratio varies by " + fmt(100 * variation) + "% across meshes");
        rep.outputs.push_back(r.path());
        rep.messages.push_back("stability: fluid ratio varies by " + fmt(100 * variation) + "% across meshes");
    }
    return rep;
}

// ---------------------------------------------------------------- convergence

RunReport run_convergence(const ExperimentConfig& cfg, int jobs)
{
    RunReport rep;
    const auto& cv = cfg.convergence;
    const bool by_L = cv.sweep == "L";
    const std::vector<double>& xs = by_L ? cfg.sweep.L_values : cfg.sweep.sigma0_values;
    const double c = cfg.media.c;
    const int m = cfg.pml.m;
    auto sigma_at = [&](std::size_t i) { return by_L ? cfg.pml.sigma0 : xs[i]; };
    auto L_at = [&](std::size_t i) { return by_L ? xs[i] : cfg.pml.L; };
    // exponents of the error in the swept variable
    const double other = by_L ? cfg.pml.sigma0 : cfg.pml.L;
    const double rate_layer = 2.0 * other / ((m + 1) * c);
    const double rate_printed = 4.0 * other / c;

    std::vector<double> errors(xs.size(), 0.0);
    if (cv.route == ConvergenceRoute::Mode) {
        const FourierMode xi(cv.mode_xi);
        const LaplaceFrequency s(cv.mode_s);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const PmlProfile p(sigma_at(i), m, L_at(i), s.s1());
            errors[i] = weighted_symbol_gap(xi, s, c, p.L_tilde());
        }
    } else if (cv.route == ConvergenceRoute::Frequency) {
        const auto geom = cfg.geometry();
        const auto& fr = cv.frequencies;
        const auto base = build_mesh(geom, cfg.pml_profile(sigma_at(0), L_at(0)), cfg.mesh_h);
        const auto src0 = make_source(cfg.source, base);
        const FrequencyDiscretization exact(base, cfg.media, Variant::ExactDtn);
        std::vector<FrequencySolution> ref(fr.size());
        parallel_for(
            static_cast<int>(fr.size()), jobs, [&](int) { return FrequencySolver(exact); },
            [&](FrequencySolver& s, int j) { ref[j] = s.solve(exact.assemble(fr[j], src0)); });
        std::vector<std::vector<double>> gaps(xs.size(), std::vector<double>(fr.size()));
        parallel_for(static_cast<int>(xs.size()), std::min(jobs, static_cast<int>(xs.size())), [&](int i) {
            const auto mesh = build_mesh(geom, cfg.pml_profile(sigma_at(i), L_at(i)), cfg.mesh_h);
            const auto src = make_source(cfg.source, mesh);
            const FrequencyDiscretization disc(mesh, cfg.media, Variant::PmlLayer);
            FrequencySolver solver(disc);
            const int nv = mesh.omega_h_vertex_count();
            for (std::size_t j = 0; j < fr.size(); ++j) {
                const auto sol = solver.solve(disc.assemble(fr[j], src));
                std::vector<cplx> dp(mesh.vertices().size(), 0.0), du1(dp.size(), 0.0), du2(dp.size(), 0.0);
                for (int v = 0; v < nv; ++v) {
                    dp[v] = sol.p[v] - ref[j].p[v];
                    du1[v] = sol.u1[v] - ref[j].u1[v];
                    du2[v] = sol.u2[v] - ref[j].u2[v];
                }
                const auto [pg, pm] = fluid_h1_parts(mesh, dp);
                const auto [ug, um] = solid_h1_parts(mesh, du1, du2);
                gaps[i][j] = pg + pm + ug + um;
                errors[i] += gaps[i][j];
            }
        });
        CsvWriter g(out_path(cfg, "convergence_modes.csv"), {"point", "value", "s_re", "s_im", "gap"});
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < fr.size(); ++j)
                g.row({num(i), num(xs[i]), num(fr[j].real()), num(fr[j].imag()), num(gaps[i][j])});
        rep.outputs.push_back(g.path());
    } else {
        const auto geom = cfg.geometry();
        double sigma_ref = cfg.pml.sigma0;
        if (!by_L) sigma_ref = std::max(sigma_ref, xs.back());
        NewmarkConfig nc;
        nc.dt = cfg.dt();
        nc.T = cfg.T;
        nc.store_fields = true;
        // slot 0 is the reference run
        std::vector<TimeTrajectory> runs(xs.size() + 1);
        std::vector<StripMesh> meshes(xs.size() + 1);
        parallel_for(static_cast<int>(runs.size()), jobs, [&](int i) {
            const PmlProfile p = i == 0 ? cfg.pml_profile(sigma_ref, cv.L_ref) : cfg.pml_profile(sigma_at(i - 1), L_at(i - 1));
            meshes[i] = build_mesh(geom, p, cfg.mesh_h);
            const auto src = make_source(cfg.source, meshes[i]);
            NewmarkConfig c2 = nc;
            if (i == 0) c2.probes = cfg.probes;
            runs[i] = newmark_run(meshes[i], cfg.media, src, c2);
        });
        const auto& ref = runs[0];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto& run = runs[i + 1];
            const auto& mesh = meshes[i + 1];
            std::vector<double> diff(mesh.vertices().size(), 0.0);
            double acc = 0.0;
            const std::size_t nt = run.omega_h_p.size();
            for (std::size_t k = 0; k < nt; ++k) {
                const auto& a = run.omega_h_p[k];
                const auto& b = ref.omega_h_p[k];
                for (std::size_t v = 0; v < a.size(); ++v) diff[v] = a[v] - b[v];
                const auto [g2, m2] = fluid_h1_parts(mesh, diff);
                acc += (k == 0 || k + 1 == nt ? 0.5 : 1.0) * (g2 + m2);
            }
            errors[i] = acc * nc.dt;
        }
        rep.metrics["reference_elements"] = static_cast<double>(meshes[0].triangles().size());
        if (cv.validate_reference) {
            const auto src = make_source(cfg.source, meshes[0]);
            const FrequencyDiscretization disc(meshes[0], cfg.media, Variant::ExactDtn);
            const auto cc = ContourConfig::defaults(cfg.T, c, cfg.period, cfg.steps);
            const auto cr = contour_synthesize(cc, disc, src, cfg.probes, jobs);
            double worst = 0.0;
            for (std::size_t k = 0; k < cfg.probes.size(); ++k)
                if (!ref.probes[k].solid) worst = std::max(worst, relative_l2_difference(ref.probes[k].p, cr.probes[k].p));
            rep.metrics["reference_route_difference"] = worst;
            rep.messages.push_back("reference vs exact-DtN contour route: max relative L2 difference " + fmt(worst));
        }
    }

    RateFit fit = fit_rate(xs, errors);
    CsvWriter csv(out_path(cfg, "convergence.csv"),
                  {"point", "sweep", "value", "sigma0", "L", "error", "log_error", "fitted", "rate_layer", "rate_printed"});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::string fitted = fit.abscissas.size() >= 3 ? num(fit.intercept + fit.slope * xs[i]) : "";
        const std::string le = errors[i] > 0.0 ? num(std::log(errors[i])) : "";
        csv.row({num(i), cv.sweep, num(xs[i]), num(sigma_at(i)), num(L_at(i)), num(errors[i]), le, fitted,
                 num(rate_layer), num(rate_printed)});
    }
    rep.outputs.insert(rep.outputs.begin(), csv.path());

    std::ostringstream line;
    line << "convergence (" << (cv.route == ConvergenceRoute::Mode ? "mode" : cv.route == ConvergenceRoute::Frequency ? "frequency" : "time")
         << ", sweep " << cv.sweep << "): errors";
    for (double e : errors) line << ' ' << fmt(e);
    rep.messages.push_back(line.str());
    rep.metrics["rate_layer"] = rate_layer;
    rep.metrics["rate_printed"] = rate_printed;
    rep.metrics["discarded"] = fit.discarded;
    if (fit.abscissas.size() >= 3) {
        rep.metrics["exponent"] = fit.exponent();
        rep.metrics["residual_fraction"] = fit.residual_fraction;
        rep.metrics["exponent_over_layer_rate"] = fit.exponent() / rate_layer;
        rep.metrics["exponent_over_printed_rate"] = fit.exponent() / rate_printed;
        rep.messages.push_back("fitted exponent " + fmt(fit.exponent()) + " vs " + fmt(rate_layer) +
                               " (layer thickness rate) and " + fmt(rate_printed) + " (printed rate); residual " +
                               fmt(100 * fit.residual_fraction) + "% of the range");
        // hold out the last point when there are enough to spare
        if (fit.abscissas.size() >= 4) {
            std::vector<double> hx(xs.begin(), xs.end() - 1), he(errors.begin(), errors.end() - 1);
            const auto h = fit_rate(hx, he);
            if (h.abscissas.size() >= 3) rep.metrics["holdout_ratio"] = errors.back() / h.predict(xs.back());
        }
    }
    if (!by_L && xs.front() == 0.0 && *std::max_element(errors.begin(), errors.end()) != errors.front())
        rep.fail("the sigma0 = 0 point is not the largest error");
    if (!fit.accepted) {
        rep.fail("rate fit rejected: " + fit.diagnostic);
    } else {
        if (!(fit.residual_fraction < cv.max_residual_fraction))
            rep.fail("fit residual " + fmt(100 * fit.residual_fraction) + "% of the fitted range");
        if (!(fit.exponent() >= cv.min_exponent_fraction * rate_layer))
            rep.fail("exponent " + fmt(fit.exponent()) + " below " + fmt(cv.min_exponent_fraction) + " x " + fmt(rate_layer));
    }
    rep.fit = fit;
    return rep;
}

// ---------------------------------------------------------------- transform identities

RunReport run_parseval(const ExperimentConfig& cfg, int jobs)
{
    RunReport rep;
    const auto& p = cfg.parseval;
    ParsevalOptions opt;
    opt.s2_max = p.s2_max;
    opt.n_s2 = p.n_s2;
    opt.jobs = jobs;

    CsvWriter pc(out_path(cfg, "parseval.csv"), {"signal", "s1", "lhs", "rhs", "residual", "relative", "tail", "pass"});
    const auto e = SampledSignal::sample([](double t) { return cplx(std::exp(-t)); }, p.exp_T_ext, p.exp_intervals);
    const auto re = parseval_residual(e, e, 1.0, opt);
    const bool e_ok = re.residual <= p.abs_tolerance && std::abs(re.lhs - 0.25) <= p.abs_tolerance;
    pc.row({"exp(-t)", num(1.0), num(re.lhs), num(re.rhs), num(re.residual), num(re.relative), num(re.tail), flag(e_ok)});
    if (!e_ok) rep.fail("Parseval residual " + fmt(re.residual) + " for exp(-t) (exact 1/4, lhs " + fmt(re.lhs) + ")");

    const Pulse pulse = cfg.source.pulse;
    const auto w = SampledSignal::sample([&](double t) { return cplx(pulse.value(t)); }, p.pulse_T_ext, p.pulse_intervals);
    const auto rw = parseval_residual(w, w, cfg.s1(), opt);
    const bool w_ok = rw.relative <= p.rel_tolerance;
    pc.row({"pulse", num(cfg.s1()), num(rw.lhs), num(rw.rhs), num(rw.residual), num(rw.relative), num(rw.tail), flag(w_ok)});
    if (!w_ok) rep.fail("Parseval relative residual " + fmt(rw.relative) + " for the pulse");
    for (const auto& msg : re.warnings) rep.messages.push_back("exp(-t): " + msg);
    for (const auto& msg : rw.warnings) rep.messages.push_back("pulse: " + msg);

    CsvWriter tc(out_path(cfg, "transform.csv"),
                 {"signal", "s_re", "s_im", "derivative", "second_derivative", "integral", "pass"});
    const std::vector<AnalyticSignal> sigs{AnalyticSignal::zero(), AnalyticSignal::ramp(), AnalyticSignal::sine(),
                                           AnalyticSignal::decay(1.0), AnalyticSignal::decay(3.0),
                                           AnalyticSignal::pulse(pulse)};
    const auto& ss = p.transform_s;
    std::vector<TransformResiduals> res(sigs.size() * ss.size());
    parallel_for(static_cast<int>(res.size()), jobs, [&](int i) {
        res[i] = transform_property_check(sigs[i / ss.size()], p.transform_T_ext, p.transform_intervals, ss[i % ss.size()]);
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        const auto& sig = sigs[i / ss.size()];
        const cplx s = ss[i % ss.size()];
        const double m = std::max({r.derivative, r.second_derivative, r.integral});
        worst = std::max(worst, m);
        const bool ok = m <= p.abs_tolerance;
        tc.row({sig.name, num(s.real()), num(s.imag()), num(r.derivative), num(r.second_derivative), num(r.integral), flag(ok)});
        if (!ok) rep.fail("transform rule residual " + fmt(m) + " for " + sig.name + " at s=" + fmt(s.real()) + "+" + fmt(s.imag()) + "i");
        for (const auto& msg : r.warnings) rep.messages.push_back(msg);
    }
    rep.outputs = {pc.path(), tc.path()};
    rep.metrics["parseval_exp_residual"] = re.residual;
    rep.metrics["parseval_exp_lhs"] = re.lhs;
    rep.metrics["parseval_pulse_relative"] = rw.relative;
    rep.metrics["transform_max_residual"] = worst;
    rep.messages.push_back("Parseval: exp(-t) residual " + fmt(re.residual) + ", pulse relative " + fmt(rw.relative) +
                           "; transform rules max residual " + fmt(worst));
    return rep;
}

// ---------------------------------------------------------------- dispatch, plots, manifest

RunReport run_experiment(const ExperimentConfig& cfg, int jobs)
{
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    const auto probe = fs::path(cfg.output_dir) / ".write-test";
    {
        std::ofstream t(probe);
        if (ec || !t) throw ConfigError("output directory '" + cfg.output_dir + "' is not writable");
    }
    fs::remove(probe, ec);

    RunReport rep;
    switch (cfg.kind) {
    case ExperimentKind::SymbolAudit: rep = run_symbol_audit(cfg, jobs); break;
    case ExperimentKind::LayerCheck: rep = run_layer_check(cfg, jobs); break;
    case ExperimentKind::FreqSolve: rep = run_freq_solve(cfg, jobs); break;
    case ExperimentKind::TdRun: rep = run_td(cfg, jobs); break;
    case ExperimentKind::Convergence: rep = run_convergence(cfg, jobs); break;
    case ExperimentKind::Parseval: rep = run_parseval(cfg, jobs); break;
    }

    std::vector<std::string> plottable;
    for (const auto& o : rep.outputs) {
        const auto name = fs::path(o).filename().string();
        if (name == "convergence.csv" || name == "symbol_curves.csv" || name == "probes.csv") plottable.push_back(o);
    }
    if (!plottable.empty()) {
        const auto script = out_path(cfg, "plot.py");
        emit_plots(plottable, script);
        rep.outputs.push_back(script);
    }
    const auto manifest = out_path(cfg, "manifest.txt");
    rep.outputs.push_back(manifest);
    write_manifest(cfg, rep, jobs, manifest);
    return rep;
}

namespace {

std::vector<std::string> read_header(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("CSV '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cols;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cols.push_back(cell);
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cols.push_back(cell);
    return cols;
}

void require_columns(const std::string& path, const std::vector<std::string>& have, const std::vector<std::string>& need)
{
    for (const auto& n : need)
        if (std::find(have.begin(), have.end(), n) == have.end())
            throw ConfigError("CSV '" + path + "' lacks column '" + n + "'");
}

std::string py_string(const std::string& s)
{
    std::string out = "'";
    for (char ch : s) {
        if (ch == '\\' || ch == '\'') out += '\\';
        out += ch;
    }
    return out + "'";
}

}  // namespace

void emit_plots(const std::vector<std::string>& csv_paths, const std::string& script_path)
{
    if (csv_paths.empty()) throw ConfigError("no CSV files to plot");
    const fs::path script_dir = fs::absolute(script_path).parent_path();
    std::vector<std::pair<std::string, std::string>> jobs;
    for (const auto& p : csv_paths) {
        if (!fs::exists(p)) throw ConfigError("CSV '" + p + "' does not exist");
        const auto cols = read_header(p);
        auto has = [&](const char* c) { return std::find(cols.begin(), cols.end(), c) != cols.end(); };
        std::string kind;
        if (has("rate_layer") || fs::path(p).filename() == "convergence.csv") {
            kind = "convergence";
            require_columns(p, cols, {"value", "error", "rate_layer", "rate_printed", "sweep"});
        } else if (has("xi") || fs::path(p).filename().string().rfind("symbol", 0) == 0) {
            kind = "symbol";
            require_columns(p, cols, {"s1", "s2", "xi", "gap"});
        } else if (has("probe_id")) {
            kind = "probes";
            require_columns(p, cols, {"t", "probe_id", "p"});
        } else {
            throw ConfigError("CSV '" + p + "' has none of the columns rate_layer, xi, probe_id");
        }
        jobs.emplace_back(fs::relative(fs::absolute(p), script_dir).string(), kind);
    }

    std::ofstream out(script_path);
    if (!out) throw ConfigError("cannot write '" + script_path + "'");
    out << "#!/usr/bin/env python3\n"
           "# Renders the listed CSV tables next to this script.\n"
           "import csv, math, os\n"
           "import matplotlib\n"
           "matplotlib.use('Agg')\n"
           "import matplotlib.pyplot as plt\n\n"
           "HERE = os.path.dirname(os.path.abspath(__file__))\n"
           "TABLES = [\n";
    for (const auto& [path, kind] : jobs) out << "    (" << py_string(path) << ", " << py_string(kind) << "),\n";
    out << "]\n\n"
           "def rows(name):\n"
           "    with open(os.path.join(HERE, name), newline='') as f:\n"
           "        return list(csv.DictReader(f))\n\n"
           "def convergence(name):\n"
           "    r = [x for x in rows(name) if x['error'] and float(x['error']) > 0]\n"
           "    if not r:\n"
           "        return\n"
           "    x = [float(v['value']) for v in r]\n"
           "    y = [math.log(float(v['error'])) for v in r]\n"
           "    fig, ax = plt.subplots()\n"
           "    ax.plot(x, y, 'o-', label='measured')\n"
           "    for col, style, label in (('rate_layer', '--', 'layer thickness rate'), ('rate_printed', ':', 'printed rate')):\n"
           "        k = float(r[0][col])\n"
           "        ax.plot(x, [y[0] - k * (xi - x[0]) for xi in x], style, label='%s %.3g' % (label, k))\n"
           "    if r[0].get('fitted'):\n"
           "        ax.plot(x, [float(v['fitted']) for v in r], '-.', label='least-squares fit')\n"
           "    ax.set_xlabel(r[0]['sweep'])\n"
           "    ax.set_ylabel('log error')\n"
           "    ax.legend()\n"
           "    fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + '.png'), dpi=150)\n\n"
           "def symbol(name):\n"
           "    groups = {}\n"
           "    for v in rows(name):\n"
           "        key = tuple((k, v[k]) for k in ('sigma0', 'L', 's1', 's2') if k in v)\n"
           "        groups.setdefault(key, []).append((float(v['xi']), float(v['gap'])))\n"
           "    fig, ax = plt.subplots()\n"
           "    for key, pts in sorted(groups.items()):\n"
           "        pts = [p for p in pts if p[0] > 0 and p[1] > 0]\n"
           "        if pts:\n"
           "            ax.loglog([p[0] for p in pts], [p[1] for p in pts], lw=0.8,\n"
           "                      label=' '.join('%s=%s' % kv for kv in key))\n"
           "    ax.set_xlabel('|xi|')\n"
           "    ax.set_ylabel('weighted gap')\n"
           "    if len(groups) <= 12:\n"
           "        ax.legend(fontsize=6)\n"
           "    fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + '.png'), dpi=150)\n\n"
           "def probes(name):\n"
           "    series = {}\n"
           "    for v in rows(name):\n"
           "        if v['p']:\n"
           "            series.setdefault(v['probe_id'], ([], []))\n"
           "            series[v['probe_id']][0].append(float(v['t']))\n"
           "            series[v['probe_id']][1].append(float(v['p']))\n"
           "    fig, ax = plt.subplots()\n"
           "    for k, (t, p) in sorted(series.items()):\n"
           "        ax.plot(t, p, label='probe ' + k)\n"
           "    ax.set_xlabel('t')\n"
           "    ax.set_ylabel('p')\n"
           "    ax.legend()\n"
           "    fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + '.png'), dpi=150)\n\n"
           "for name, kind in TABLES:\n"
           "    globals()[kind](name)\n";
}

void write_manifest(const ExperimentConfig& cfg, const RunReport& report, int jobs, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest '" + path + "'");
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.canonical)));
    out << "tdpml-manifest 1\n"
        << "experiment: " << to_string(cfg.kind) << '\n'
        << "config_hash: fnv1a64:" << hash << '\n'
        << "seed: " << cfg.seed << '\n'
        << "version: " << version() << '\n'
        << "eigen: " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
        << "compiler: " << __VERSION__ << '\n'
        << "jobs: " << resolve_jobs(jobs) << '\n'
        << "result: " << (report.pass ? "pass" : "fail") << '\n';
    for (const auto& o : report.outputs)
        if (o != path) out << "output: " << fs::path(o).filename().string() << '\n';
    for (const auto& [k, v] : report.metrics) out << "metric: " << k << " = " << csv_number(v) << '\n';
    for (const auto& m : report.messages) out << "message: " << m << '\n';
    out << "config: " << cfg.canonical << '\n';
}

}  // namespace tdpml
