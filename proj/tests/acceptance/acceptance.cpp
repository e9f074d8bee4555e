// Acceptance run: one line per criterion, nonzero exit if any criterion fails.
// Outputs land in ./acceptance_out (relative to the working directory).

#include "tdpml/error.hpp"
#include "tdpml/freq_solver.hpp"
#include "tdpml/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

using namespace tdpml;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentConfig make(const std::string& json, const std::string& sub)
{
    auto c = parse_config(json);
    c.output_dir = "acceptance_out/" + sub;
    return c;
}

RunReport run(const ExperimentConfig& c)
{
    return run_experiment(c, jobs());
}

std::string g(double v)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

std::string failures(const RunReport& r)
{
    std::string s;
    for (const auto& m : r.messages)
        if (m.rfind("FAIL", 0) == 0) s += "; " + m;
    return s;
}

// ---- criteria

RunReport audit_report;  // shared by the first two criteria

Outcome symbol_bound(double& seconds)
{
    const auto t0 = std::chrono::steady_clock::now();
    audit_report = run(make(R"({"experiment": "symbol-audit",
        "audit": {"s1": [0.1, 1.0], "s2_min": -50, "s2_max": 50, "s2_count": 201, "xi_max": 100, "xi_count": 401},
        "sweep": {"sigma0": [1, 2, 4], "L": [0.5, 1, 2]}, "pml.m": 1})", "symbol"));
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& m = audit_report.metrics;
    const bool ok = m.at("violations") == 0 && m.at("max_gap_over_bound") <= 1.0 + 1e-10 && seconds < 5.0;
    return {ok, g(m.at("grid_points")) + " points, max gap/bound " + g(m.at("max_gap_over_bound")) + ", " +
                    g(m.at("violations")) + " violations, limit 5 s"};
}

Outcome passivity(double&)
{
    const auto& m = audit_report.metrics;
    const bool ok = m.at("passivity_violations") == 0 && m.at("min_re_beta_over_s") >= -1e-14;
    return {ok, "min Re(beta/s) " + g(m.at("min_re_beta_over_s")) + " over the same grid"};
}

Outcome layer(double&)
{
    const auto r = run(make(R"({"experiment": "layer-check", "pml": {"sigma0": 2.0, "m": 1, "L": 1.0},
        "layer": {"n": [32, 64, 128, 256], "xi": 0.0, "s": 1.0, "order_target": 2.0, "order_tolerance": 0.2}})", "layer"));
    const auto& m = r.metrics;
    const bool ok = r.pass && m.at("midpoint_error") <= 1e-3 && std::abs(m.at("midpoint_exact_re") - 0.44168) < 1e-5;
    return {ok, "orders in [" + g(m.at("min_order")) + ", " + g(m.at("max_order")) + "], midpoint " + g(m.at("midpoint_fd_re")) +
                    " vs " + g(m.at("midpoint_exact_re")) + failures(r)};
}

Outcome coercivity(double& seconds)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run(make(R"({"experiment": "freq-solve", "mesh.h": 0.045,
        "freq": {"variants": ["exact_dtn", "pml_dtn", "pml_layer"], "frequencies": [[1.0, 0.0], [1.0, 10.0]],
                 "coercivity_samples": 200, "coercivity_refine": true}})", "coercivity"));
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double worst = 0.0;
    for (const auto& [k, v] : r.metrics)
        if (k.rfind("coercivity_variation_", 0) == 0) worst = std::max(worst, v);
    return {r.pass && seconds < 60.0, g(r.metrics.at("elements")) + " elements, worst variation under refinement " +
                                          g(100 * worst) + "%, limit 60 s" + failures(r)};
}

Outcome manufactured(double&)
{
    struct Case {
        const char* name;
        bool rough, obstacle;
    };
    MediaParams md;
    md.rho0 = 1.2;
    md.rho_e = 2.0;
    md.lambda = 2.0;
    md.mu = 1.5;
    const cplx s(1.0, 2.0);
    const PmlProfile pml(2, 1, 0.5, 1);
    std::ostringstream det;
    bool ok = true;
    for (const Case c : {Case{"flat", false, false}, Case{"cosine", true, false}, Case{"cosine+obstacle", true, true}}) {
        Geometry geom;
        geom.surface = c.rough ? Surface::cosine(1.0, 0.1, 1) : Surface::flat(1.0);
        if (c.obstacle) geom.obstacle = {{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}};
        ExactFields f;
        f.p = [geom](const Point2& x) {
            const double k = 2 * std::numbers::pi;
            return (x.x3 - geom.surface(x.x1)) * cplx(1.0 + 0.5 * std::cos(k * x.x1), 0.3 * std::sin(k * x.x1)) *
                   std::exp(-0.5 * x.x3);
        };
        f.u = [](const Point2& x) {
            return std::array<cplx, 2>{cplx(0.1 + 0.2 * x.x1 * x.x3, 0.1 * x.x3 * x.x3), cplx(-0.2 * x.x1 * x.x1 + 0.1 * x.x3, 0.05)};
        };
        std::vector<double> lx, ly;
        for (double hm : {0.1, 0.05, 0.025}) {
            const auto mesh = build_mesh(geom, pml, hm);
            const FrequencyDiscretization disc(mesh, md, Variant::ExactDtn);
            const auto sol = solve_frequency(disc.assemble(s, manufactured_residual(disc, s, f)));
            const auto e = field_errors(disc, sol, f);
            lx.push_back(std::log(hm));
            ly.push_back(std::log(std::hypot(e.p_l2, e.u_l2)));
        }
        // least-squares slope over the three meshes
        const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
        double sxy = 0, sxx = 0;
        for (int i = 0; i < 3; ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        const double order = sxy / sxx;
        ok = ok && std::abs(order - 2.0) <= 0.3;
        det << c.name << " " << g(order) << " ";
    }
    return {ok, "L2 orders: " + det.str()};
}

Outcome mode_rate(double& seconds)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run(make(R"({"experiment": "convergence", "pml": {"sigma0": 2.0, "m": 1},
        "sweep.L": [0.25, 0.5, 1.0, 1.5, 2.0], "convergence": {"route": "mode", "mode_s": 1.0, "mode_xi": 0.0}})", "mode"));
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.fit || r.fit->abscissas.size() < 3) return {false, "no fit" + failures(r)};
    const double e = r.fit->exponent(), target = r.metrics.at("rate_layer");
    return {std::abs(e - target) <= 0.1 * target && seconds < 1.0,
            "log-gap slope " + g(e) + " vs " + g(target) + " (within 10%), alternative rate " + g(r.metrics.at("rate_printed"))};
}

Outcome field_rate(double& seconds)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run(make(R"({"experiment": "convergence", "mesh.h": 0.025, "pml": {"sigma0": 2.0, "m": 1},
        "sweep.L": [0.25, 0.5, 1.0], "convergence": {"route": "time", "sweep": "L", "L_ref": 3.0}})", "field"));
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string errs;
    if (!r.messages.empty()) errs = r.messages.front();
    return {r.pass && seconds < 900.0, errs + "; reference mesh " + g(r.metrics.at("reference_elements")) + " elements" + failures(r)};
}

Outcome stability(double&)
{
    const auto r = run(make(R"({"experiment": "td-run", "pml.L": 1.0, "td": {"stability": true},
        "sweep": {"mesh_h": [0.025, 0.05, 0.1], "sigma0": [1, 2, 4]}})", "stability"));
    return {r.pass, "fluid ratio variation " + g(100 * r.metrics.at("stability_mesh_variation")) +
                        "% over three meshes, normalized PML ratio checked for sigma0 1, 2, 4" + failures(r)};
}

Outcome transforms(double&)
{
    const auto r = run(make(R"({"experiment": "parseval"})", "parseval"));
    const auto& m = r.metrics;
    const bool ok = r.pass && m.at("transform_max_residual") <= 1e-6 && m.at("parseval_exp_residual") <= 1e-6 &&
                    m.at("parseval_pulse_relative") <= 1e-5;
    return {ok, "rules " + g(m.at("transform_max_residual")) + ", e^{-t} pair " + g(m.at("parseval_exp_residual")) +
                    " (lhs " + g(m.at("parseval_exp_lhs")) + "), pulse relative " + g(m.at("parseval_pulse_relative")) + failures(r)};
}

Outcome routes(double&)
{
    const auto r = run(make(R"({"experiment": "td-run", "pml.L": 3.0, "td": {"compare_contour": true, "route_tolerance": 0.05}})", "routes"));
    return {r.pass && r.metrics.at("route_difference") <= 0.05,
            "worst relative L2 difference over 3 probes " + g(100 * r.metrics.at("route_difference")) + "%" + failures(r)};
}

Outcome causality(double&)
{
    const auto r = run(make(R"({"experiment": "td-run", "geometry": {"surface": "flat", "obstacle": []}, "mesh.h": 0.0125,
        "probes": [[0.75, 0.6]], "td": {"causality": true, "causality_tolerance": 1e-6, "energy_csv": false}})", "causality"));
    return {r.pass && r.metrics.at("pre_arrival_ratio") <= 1e-6,
            "pre-arrival ratio " + g(r.metrics.at("pre_arrival_ratio")) + failures(r)};
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome(double&)> fn;
    };
    const Criterion all[] = {
        {1, "symbol bound certification", symbol_bound},
        {2, "modal passivity", passivity},
        {3, "layer problem consistency", layer},
        {4, "discrete coercivity", coercivity},
        {5, "manufactured-solution convergence", manufactured},
        {6, "per-mode PML convergence", mode_rate},
        {7, "field-level exponential convergence", field_rate},
        {8, "stability envelopes", stability},
        {9, "transform identities", transforms},
        {10, "route consistency", routes},
        {11, "causality", causality},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        double timed = 0.0;
        Outcome o;
        try {
            o = c.fn(timed);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2d %-38s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(all)) - failed, std::size(all));
    return failed == 0 ? 0 : 1;
}
