#include "tdpml/time_solver.hpp"

#include "tdpml/error.hpp"
#include "tdpml/parallel.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace tdpml {

ContourConfig ContourConfig::defaults(double T, double c, double period, int n_times)
{
    if (!(T > 0.0) || n_times < 1) throw ConfigError("horizon and number of output times must be positive");
    ContourConfig cfg;
    cfg.s1 = 1.0 / T;
    cfg.s2_max = 40.0 * c / period;
    cfg.n_freq = 401;
    for (int k = 0; k <= n_times; ++k) cfg.t_grid.push_back(T * k / n_times);
    return cfg;
}

void ContourConfig::validate() const
{
    if (!(s1 > 0.0)) throw ConfigError("contour abscissa s1 must be positive");
    if (!(s2_max > 0.0)) throw ConfigError("contour half-width s2_max must be positive");
    if (n_freq < 3 || n_freq % 2 == 0) throw ConfigError("n_freq must be odd and at least 3");
    for (double t : t_grid)
        if (!(t >= 0.0)) throw ConfigError("output times must be nonnegative");
}

std::vector<double> ContourConfig::s2_nonnegative() const
{
    const int half = (n_freq - 1) / 2;
    std::vector<double> s2(half + 1);
    for (int j = 0; j <= half; ++j) s2[j] = s2_max * j / half;
    return s2;
}

std::vector<double> contour_invert(const ContourConfig& cfg, const std::vector<cplx>& samples)
{
    cfg.validate();
    const auto s2 = cfg.s2_nonnegative();
    if (samples.size() != s2.size()) throw ConfigError("sample count does not match the contour grid");
    const double ds = s2.size() > 1 ? s2[1] - s2[0] : 0.0;
    std::vector<double> out(cfg.t_grid.size());
    for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
        const double t = cfg.t_grid[i];
        cplx acc = 0.0;
        for (std::size_t j = 0; j < s2.size(); ++j) {
            const double w = (j == 0 || j + 1 == s2.size()) ? 0.5 * ds : ds;
            acc += w * samples[j] * std::exp(cplx(0.0, s2[j] * t));
        }
        out[i] = std::exp(cfg.s1 * t) / std::numbers::pi * acc.real();
    }
    return out;
}

ContourCheck contour_self_check(const ContourConfig& cfg, const Pulse& pulse)
{
    std::vector<cplx> samples;
    for (double s2 : cfg.s2_nonnegative()) samples.push_back(pulse.laplace({cfg.s1, s2}));
    const auto rec = contour_invert(cfg, samples);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double exact = pulse.value(cfg.t_grid[i]);
        err = std::max(err, std::abs(rec[i] - exact));
        scale = std::max(scale, std::abs(exact));
    }
    ContourCheck c;
    c.max_error = err;
    c.relative_error = scale > 0.0 ? err / scale : 0.0;
    c.sufficient = c.max_error <= 1e-3;
    return c;
}

namespace {

struct ProbeLocation {
    Point2 x;
    std::array<int, 3> vertices{};
    std::array<double, 3> bary{};
    bool solid = false;
};

std::vector<ProbeLocation> locate_probes(const StripMesh& mesh, const std::vector<Point2>& probes)
{
    std::vector<ProbeLocation> out;
    for (const auto& x : probes) {
        const auto loc = mesh.locate(x);
        if (loc.element < 0) throw DomainError("probe lies outside the mesh");
        ProbeLocation p;
        p.x = x;
        p.vertices = mesh.triangles()[loc.element];
        p.bary = loc.bary;
        p.solid = mesh.regions()[loc.element] == Region::Solid;
        out.push_back(p);
    }
    return out;
}

template <class Vec>
std::array<typename Vec::Scalar, 3> probe_values(const ProbeLocation& pr, const DofMap& dofs, const Vec& x)
{
    using T = typename Vec::Scalar;
    std::array<T, 3> v{T(0), T(0), T(0)};
    for (int k = 0; k < 3; ++k) {
        const int vert = pr.vertices[k];
        if (pr.solid) {
            v[1] += pr.bary[k] * x[dofs.u[vert]];
            v[2] += pr.bary[k] * x[dofs.u[vert] + 1];
        } else if (dofs.p[vert] >= 0) {
            v[0] += pr.bary[k] * x[dofs.p[vert]];
        }
    }
    return v;
}

}  // namespace

ContourResult contour_synthesize(const ContourConfig& cfg, const FrequencyDiscretization& disc, const SourceField& src,
                                 const std::vector<Point2>& probes, int jobs)
{
    cfg.validate();
    const auto locs = locate_probes(disc.mesh(), probes);
    const auto s2 = cfg.s2_nonnegative();
    const Eigen::VectorXcd b = disc.source_vector(src).cast<cplx>();
    const int n = static_cast<int>(s2.size());
    std::vector<std::vector<std::array<cplx, 3>>> values(n);

    parallel_for(
        n, jobs, [&](int) { return FrequencySolver(disc); },
        [&](FrequencySolver& solver, int j) {
            const cplx s(cfg.s1, s2[j]);
            const auto sol = solver.solve(s, Eigen::VectorXcd(src.laplace(s) * b));
            for (const auto& loc : locs) values[j].push_back(probe_values(loc, disc.dofs(), sol.x));
        });

    ContourResult res;
    res.t = cfg.t_grid;
    res.check = contour_self_check(cfg, src.spec.pulse);
    if (!res.check.sufficient) {
        std::ostringstream msg;
        msg << "contour too coarse: pulse reconstruction error " << res.check.max_error
            << " exceeds 1e-3; increase s2_max or n_freq";
        res.warnings.push_back(msg.str());
    }
    for (std::size_t k = 0; k < locs.size(); ++k) {
        ProbeSeries ps;
        ps.x = locs[k].x;
        ps.solid = locs[k].solid;
        for (int comp = 0; comp < 3; ++comp) {
            if ((comp == 0) == ps.solid) continue;
            std::vector<cplx> samples(n);
            for (int j = 0; j < n; ++j) samples[j] = values[j][k][comp];
            auto series = contour_invert(cfg, samples);
            (comp == 0 ? ps.p : comp == 1 ? ps.u1 : ps.u2) = std::move(series);
        }
        res.probes.push_back(std::move(ps));
    }
    return res;
}

TimeTrajectory newmark_run(const StripMesh& mesh, const MediaParams& media, const SourceField& src,
                           const NewmarkConfig& cfg)
{
    if (!(cfg.dt > 0.0) || !(cfg.T > 0.0)) throw ConfigError("time step and horizon must be positive");
    if (mesh.count(Region::Pml) == 0) throw ConfigError("time stepping needs a mesh with a PML region");
    const DofMap dofs = make_dofmap(mesh, Domain::OmegaHL);
    const SpatialOperators ops = assemble_spatial(mesh, media, dofs);
    const double rho0 = media.rho0;
    const SparseReal Ct = ops.C.transpose();
    const SparseReal M = ops.Mf - rho0 * ops.C + media.rho_e * ops.Ms;
    const SparseReal K = ops.Kf + Ct + ops.Ks;
    const Eigen::VectorXd b = source_load_vector(mesh, media, dofs, [&](const Point2& x) { return src.spatial(x); });

    const double dt = cfg.dt;
    SparseReal Meff = M + (0.25 * dt * dt) * K;
    Meff.makeCompressed();
    Eigen::SparseLU<SparseReal, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(Meff);
    if (lu.info() != Eigen::Success)
        throw SolverError("factorization of the Newmark matrix failed: " + lu.lastErrorMessage());

    const auto locs = locate_probes(mesh, cfg.probes);
    const int n_steps = static_cast<int>(std::ceil(cfg.T / dt - 1e-9));
    const int n = dofs.size();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n), v = x, a = x;

    TimeTrajectory traj;
    traj.dt = dt;
    traj.sigma0 = mesh.pml().sigma0();
    traj.horizon = cfg.T;
    for (const auto& loc : locs) {
        ProbeSeries ps;
        ps.x = loc.x;
        ps.solid = loc.solid;
        traj.probes.push_back(ps);
    }
    const int n_omega = mesh.omega_h_vertex_count();
    std::vector<int> snapshot_steps;
    for (double ts : cfg.snapshot_times) snapshot_steps.push_back(static_cast<int>(std::lround(ts / dt)));

    auto force = [&](double t) -> Eigen::VectorXd {
        if (t > cfg.source_off_after) return Eigen::VectorXd::Zero(n);
        return src.time_d1(t) * b;
    };
    auto quad = [](const SparseReal& m, const Eigen::VectorXd& y) { return std::sqrt(std::max(0.0, y.dot(m * y))); };

    double work = 0.0;
    auto record = [&](int k, const Eigen::VectorXd& f) {
        const double t = k * dt;
        traj.t.push_back(t);
        StepRecord r;
        r.t = t;
        r.energy = 0.5 * (v.dot(ops.Mf * v) + x.dot(ops.Kf * x) + rho0 * media.rho_e * a.dot(ops.Ms * a) +
                          rho0 * v.dot(ops.Ks * v));
        r.power = v.dot(f);
        r.work = work;
        r.dt_p = quad(ops.mass_p, v);
        r.grad_p = quad(ops.grad_p, x);
        r.dt_u = quad(ops.Ms, v);
        r.div_u = quad(ops.div_u, x);
        r.grad_u = quad(ops.grad_u, x);
        traj.steps.push_back(r);
        for (std::size_t i = 0; i < locs.size(); ++i) {
            const auto pv = probe_values(locs[i], dofs, x);
            if (locs[i].solid) {
                traj.probes[i].u1.push_back(pv[1]);
                traj.probes[i].u2.push_back(pv[2]);
            } else {
                traj.probes[i].p.push_back(pv[0]);
            }
        }
        if (dofs.n_p > 0) traj.field_max = std::max(traj.field_max, x.head(dofs.n_p).cwiseAbs().maxCoeff());
        if (cfg.store_fields) {
            std::vector<double> field(n_omega, 0.0);
            for (int vtx = 0; vtx < n_omega; ++vtx)
                if (dofs.p[vtx] >= 0) field[vtx] = x[dofs.p[vtx]];
            traj.omega_h_p.push_back(std::move(field));
        }
        for (int ss : snapshot_steps)
            if (ss == k) traj.snapshots.emplace_back(t, pressure_nodal(dofs, x));
    };

    Eigen::VectorXd f = force(0.0);
    {
        // initial acceleration from M a0 = f(0) - K x0
        Eigen::SparseLU<SparseReal, Eigen::COLAMDOrdering<int>> mlu;
        SparseReal Mc = M;
        Mc.makeCompressed();
        if (f.norm() > 0.0) {
            mlu.compute(Mc);
            if (mlu.info() != Eigen::Success) throw SolverError("mass matrix factorization failed");
            a = mlu.solve(f);
        }
    }
    record(0, f);
    Eigen::VectorXd f_prev = f;
    for (int k = 1; k <= n_steps; ++k) {
        const Eigen::VectorXd pred = x + dt * v + (0.25 * dt * dt) * a;
        f = force(k * dt);
        const Eigen::VectorXd a_new = lu.solve(f - K * pred);
        if (lu.info() != Eigen::Success) throw SolverError("Newmark solve failed");
        x = pred + (0.25 * dt * dt) * a_new;
        const Eigen::VectorXd v_old = v, f_old = f_prev;
        v += (0.5 * dt) * (a + a_new);
        work += 0.25 * dt * (v_old + v).dot(f_old + f);
        f_prev = f;
        a = a_new;
        record(k, f);
    }
    return traj;
}

EnergyTrace energy_trace(const TimeTrajectory& traj, const StripMesh& mesh, const SourceField& src)
{
    EnergyTrace e;
    const double chi = source_l2_norm(mesh, [&](const Point2& x) { return src.spatial(x); });
    const int sub = 16;
    double acc = 0.0;
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
        if (k > 0) {
            const double t0 = traj.t[k - 1], h = (traj.t[k] - t0) / sub;
            for (int j = 0; j < sub; ++j)
                acc += 0.5 * h * (std::abs(src.time_d1(t0 + j * h)) + std::abs(src.time_d1(t0 + (j + 1) * h)));
        }
        const double l1 = chi * acc;
        const auto& r = traj.steps[k];
        const double fl = r.dt_p + r.grad_p, so = r.dt_u + r.div_u + r.grad_u;
        e.source_l1.push_back(l1);
        e.fluid_ratio.push_back(l1 > 0.0 ? fl / l1 : 0.0);
        e.solid_ratio.push_back(l1 > 0.0 ? so / l1 : 0.0);
        e.max_fluid = std::max(e.max_fluid, e.fluid_ratio.back());
        e.max_solid = std::max(e.max_solid, e.solid_ratio.back());
    }
    const double grow = 1.0 + traj.sigma0 * traj.horizon;
    e.max_fluid_pml = e.max_fluid / grow;
    e.max_solid_pml = e.max_solid / std::sqrt(grow);
    return e;
}

double pre_arrival_ratio(const TimeTrajectory& traj, std::size_t probe, double t_arrival)
{
    if (probe >= traj.probes.size() || traj.probes[probe].solid) throw DomainError("not a fluid probe");
    double m = 0.0;
    for (std::size_t k = 0; k < traj.t.size(); ++k)
        if (traj.t[k] < t_arrival) m = std::max(m, std::abs(traj.probes[probe].p[k]));
    return traj.field_max > 0.0 ? m / traj.field_max : 0.0;
}

double relative_l2_difference(const std::vector<double>& a, const std::vector<double>& reference)
{
    if (a.size() != reference.size()) throw DomainError("series lengths differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = (i == 0 || i + 1 == a.size()) ? 0.5 : 1.0;
        num += w * (a[i] - reference[i]) * (a[i] - reference[i]);
        den += w * reference[i] * reference[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

void write_probe_csv(const std::string& path, const std::vector<double>& t, const std::vector<ProbeSeries>& probes)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "t,probe_id,p,u1,u2\n" << std::setprecision(17);
    for (std::size_t k = 0; k < t.size(); ++k)
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const auto& pr = probes[i];
            out << t[k] << ',' << i << ',';
            if (pr.solid)
                out << ',' << pr.u1[k] << ',' << pr.u2[k] << '\n';
            else
                out << pr.p[k] << ",,\n";
        }
}

}  // namespace tdpml
