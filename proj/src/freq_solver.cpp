#include "tdpml/freq_solver.hpp"

#include "tdpml/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace tdpml {

std::string to_string(Variant v)
{
    switch (v) {
    case Variant::ExactDtn: return "exact_dtn";
    case Variant::PmlDtn: return "pml_dtn";
    case Variant::PmlLayer: return "pml_layer";
    }
    return "?";
}

Variant parse_variant(const std::string& name)
{
    if (name == "exact_dtn") return Variant::ExactDtn;
    if (name == "pml_dtn") return Variant::PmlDtn;
    if (name == "pml_layer") return Variant::PmlLayer;
    throw ConfigError("unknown variant '" + name + "' (expected exact_dtn, pml_dtn or pml_layer)");
}

Domain domain_of(Variant v)
{
    return v == Variant::PmlLayer ? Domain::OmegaHL : Domain::OmegaH;
}

namespace {

// int_0^d t e^{-ikt} dt
cplx ramp_integral(double k, double d)
{
    const double kd = k * d;
    if (std::abs(kd) < 1e-2) {
        cplx sum = 0.0, term = 1.0;  // (-ikd)^m / m!
        for (int m = 0; m < 12; ++m) {
            sum += term / double(m + 2);
            term *= cplx(0.0, -kd) / double(m + 1);
        }
        return d * d * sum;
    }
    const cplx e = std::exp(cplx(0.0, -kd));
    return (e * cplx(1.0, kd) - 1.0) / (k * k);
}

// Fourier coefficient int phi(x) e^{-ikx} dx of the hat function with
// support [a, c] and peak at b.
cplx hat_coefficient(double k, double a, double b, double c)
{
    const double dl = b - a, dr = c - b;
    const cplx left = std::exp(cplx(0.0, -k * a)) / dl * ramp_integral(k, dl);
    const cplx right = std::exp(cplx(0.0, -k * c)) / dr * ramp_integral(-k, dr);
    return left + right;
}

int find_slot(const SparseReal& m, int row, int col)
{
    const int* inner = m.innerIndexPtr();
    const int begin = m.outerIndexPtr()[col], end = m.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(inner + begin, inner + end, row);
    if (it == inner + end || *it != row) throw SolverError("sparsity pattern is missing an entry");
    return static_cast<int>(it - inner);
}

}  // namespace

FrequencyDiscretization::FrequencyDiscretization(const StripMesh& mesh, const MediaParams& media, Variant variant,
                                                 int n_modes)
    : mesh_(std::make_shared<StripMesh>(mesh)), media_(media), variant_(variant), n_modes_(n_modes)
{
    if (n_modes < 0) throw ConfigError("number of DtN modes must be nonnegative");
    if (variant == Variant::PmlLayer && mesh.count(Region::Pml) == 0)
        throw ConfigError("pml_layer variant needs a mesh with a PML region");
    dofs_ = std::make_shared<DofMap>(make_dofmap(mesh, domain_of(variant)));
    ops_ = assemble_spatial(mesh, media, *dofs_);

    const int n = dofs_->size();
    const SparseReal Ct = ops_.C.transpose();
    const std::vector<const SparseReal*> comps{&ops_.Kf, &ops_.Mf, &ops_.C, &Ct, &ops_.Ks, &ops_.Ms};

    std::vector<Eigen::Triplet<double>> trip;
    for (const auto* m : comps)
        for (int k = 0; k < m->outerSize(); ++k)
            for (SparseReal::InnerIterator it(*m, k); it; ++it) trip.emplace_back(it.row(), it.col(), 0.0);

    const bool dtn = variant != Variant::PmlLayer;
    std::vector<int> gh;
    if (dtn)
        for (int v : dofs_->gamma_h) gh.push_back(dofs_->p[v]);
    for (int a : gh)
        for (int b : gh) trip.emplace_back(a, b, 0.0);

    SparseReal pattern(n, n);
    pattern.setFromTriplets(trip.begin(), trip.end());
    pattern.makeCompressed();

    for (const auto* m : comps) {
        std::vector<double> vals(pattern.nonZeros(), 0.0);
        for (int k = 0; k < m->outerSize(); ++k)
            for (SparseReal::InnerIterator it(*m, k); it; ++it)
                vals[find_slot(pattern, static_cast<int>(it.row()), static_cast<int>(it.col()))] += it.value();
        component_values_.push_back(std::move(vals));
    }
    for (int a : gh)
        for (int b : gh) dtn_slot_.push_back(find_slot(pattern, a, b));
    pattern_ = pattern.cast<cplx>();

    if (dtn) {
        const auto& xs = dofs_->gamma_h_x;
        const int m = static_cast<int>(gh.size());
        const double period = mesh.geometry().period;
        mode_coeffs_.resize(2 * n_modes + 1, m);
        for (int j = -n_modes; j <= n_modes; ++j) {
            const double k = 2.0 * std::numbers::pi * j / period;
            for (int a = 0; a < m; ++a) {
                const double left = a == 0 ? xs[m - 1] - period : xs[a - 1];
                mode_coeffs_(j + n_modes, a) = hat_coefficient(k, left, xs[a], xs[a + 1]);
            }
        }
    }
}

SparseCplx FrequencyDiscretization::matrix(cplx s) const
{
    if (!(s.real() > 0.0)) throw DomainError("Re s must be positive");
    const double rho0 = media_.rho0;
    const std::array<cplx, 6> coeff{1.0 / s, s, -rho0 * s, rho0 * std::conj(s), rho0 * std::conj(s),
                                    rho0 * media_.rho_e * std::norm(s) * s};
    SparseCplx A = pattern_;
    cplx* v = A.valuePtr();
    const auto nnz = A.nonZeros();
    for (Eigen::Index k = 0; k < nnz; ++k) {
        cplx acc = 0.0;
        for (std::size_t c = 0; c < coeff.size(); ++c) acc += coeff[c] * component_values_[c][k];
        v[k] = acc;
    }

    if (variant_ != Variant::PmlLayer) {
        const LaplaceFrequency sf(s);
        const double Lt = mesh_->pml().L_tilde();
        const double period = mesh_->geometry().period;
        Eigen::VectorXcd symbol(2 * n_modes_ + 1);
        for (int j = -n_modes_; j <= n_modes_; ++j) {
            const FourierMode xi(2.0 * std::numbers::pi * j / period);
            const cplx b = variant_ == Variant::ExactDtn ? dtn_symbol(xi, sf, media_.c)
                                                          : pml_dtn_symbol(xi, sf, media_.c, Lt);
            symbol[j + n_modes_] = -b / (s * period);
        }
        const Eigen::MatrixXcd block = mode_coeffs_.adjoint() * symbol.asDiagonal() * mode_coeffs_;
        const int m = static_cast<int>(block.rows());
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) v[dtn_slot_[a * m + b]] += block(a, b);
    }
    return A;
}

Eigen::VectorXd FrequencyDiscretization::source_vector(const SourceField& src) const
{
    return source_load_vector(*mesh_, media_, *dofs_, [&](const Point2& x) { return src.spatial(x); });
}

FrequencySystem FrequencyDiscretization::assemble(cplx s, const Eigen::VectorXcd& rhs) const
{
    if (rhs.size() != dofs_->size()) throw DomainError("right-hand side has the wrong size");
    FrequencySystem sys;
    sys.variant = variant_;
    sys.s = s;
    sys.A = matrix(s);
    sys.b = rhs;
    sys.dofs = dofs_;
    return sys;
}

FrequencySystem FrequencyDiscretization::assemble(cplx s, const SourceField& src) const
{
    return assemble(s, Eigen::VectorXcd(src.laplace(s) * source_vector(src).cast<cplx>()));
}

double FrequencyDiscretization::h_norm_sq(const Eigen::VectorXcd& w) const
{
    const Eigen::VectorXcd g = ops_.grad_p * w + ops_.mass_p * w + ops_.grad_u * w + ops_.Ms * w;
    return w.dot(g).real();
}

FrequencySolution unpack(const DofMap& dofs, const Eigen::VectorXcd& x)
{
    FrequencySolution sol;
    sol.x = x;
    sol.p = pressure_nodal(dofs, x);
    sol.u1.assign(dofs.u.size(), 0.0);
    sol.u2.assign(dofs.u.size(), 0.0);
    for (std::size_t v = 0; v < dofs.u.size(); ++v) {
        if (dofs.u[v] < 0) continue;
        sol.u1[v] = x[dofs.u[v]];
        sol.u2[v] = x[dofs.u[v] + 1];
    }
    return sol;
}

namespace {

template <class LU>
FrequencySolution finish_solve(LU& lu, const FrequencySystem& sys)
{
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse factorization failed at s = (" + std::to_string(sys.s.real()) + ", " +
                          std::to_string(sys.s.imag()) + "): " + lu.lastErrorMessage());
    const double bnorm = sys.b.norm();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(sys.b.size());
    double res = 0.0;
    int refinements = 0;
    if (bnorm > 0.0) {
        x = lu.solve(sys.b);
        Eigen::VectorXcd r = sys.b - sys.A * x;
        res = r.norm() / bnorm;
        while (res > 1e-12 && refinements < 5) {
            x += lu.solve(r);
            r = sys.b - sys.A * x;
            res = r.norm() / bnorm;
            ++refinements;
        }
        if (!std::isfinite(res) || res > 1e-10) {
            std::ostringstream msg;
            msg << "linear system is numerically singular: relative residual " << res << " after "
                << refinements << " refinement steps, log|det A| = " << lu.logAbsDeterminant();
            throw SolverError(msg.str());
        }
    }
    FrequencySolution sol = unpack(*sys.dofs, x);
    sol.variant = sys.variant;
    sol.s = sys.s;
    sol.residual = res;
    sol.refinements = refinements;
    sol.dofs = sys.dofs;
    return sol;
}

}  // namespace

FrequencySolver::FrequencySolver(const FrequencyDiscretization& disc) : disc_(&disc) {}

FrequencySolution FrequencySolver::solve(const FrequencySystem& sys)
{
    if (!analyzed_) {
        lu_.analyzePattern(sys.A);
        analyzed_ = true;
    }
    lu_.factorize(sys.A);
    return finish_solve(lu_, sys);
}

FrequencySolution FrequencySolver::solve(cplx s, const Eigen::VectorXcd& rhs)
{
    return solve(disc_->assemble(s, rhs));
}

FrequencySystem assemble(const StripMesh& mesh, const MediaParams& media, cplx s, const SourceField& src,
                         Variant variant)
{
    return FrequencyDiscretization(mesh, media, variant).assemble(s, src);
}

FrequencySolution solve_frequency(const FrequencySystem& sys)
{
    Eigen::SparseLU<SparseCplx, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(sys.A);
    return finish_solve(lu, sys);
}

CoercivityProbe coercivity_probe(const FrequencyDiscretization& disc, cplx s, const Eigen::VectorXcd& omega)
{
    const SparseCplx A = disc.matrix(s);
    return {omega.dot(A * omega).real(), disc.h_norm_sq(omega)};
}

StabilityRatios stability_ratios(const FrequencyDiscretization& disc, const FrequencySolution& sol, double g_norm)
{
    const auto& ops = disc.ops();
    const Eigen::VectorXcd& x = sol.x;
    auto quad = [&](const SparseReal& m) { return std::sqrt(std::max(0.0, x.dot(m * x).real())); };
    StabilityRatios r;
    const double as = std::abs(sol.s), s1 = sol.s.real();
    r.grad_p = quad(ops.grad_p);
    r.s_p = as * quad(ops.mass_p);
    r.grad_u = quad(ops.grad_u);
    r.div_u = quad(ops.div_u);
    r.s_u = as * quad(ops.Ms);
    const double fluid = r.grad_p + r.s_p, solid = r.grad_u + r.div_u + r.s_u;
    if (g_norm == 0.0) {
        if (fluid + solid > 0.0) throw DomainError("zero source with a nonzero solution");
        return r;
    }
    double ffac = 1.0, sfac = 1.0;
    if (disc.variant() != Variant::ExactDtn) {
        ffac = 1.0 + disc.mesh().pml().sigma0() / s1;
        sfac = std::sqrt(ffac);
    }
    r.fluid_bound = as / s1 * g_norm * ffac;
    r.solid_bound = g_norm / (s1 * std::min(1.0, s1)) * sfac;
    r.fluid_ratio = fluid / r.fluid_bound;
    r.solid_ratio = solid / r.solid_bound;
    return r;
}

namespace {

using Vec2 = std::array<cplx, 2>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;  // J[a][b] = d u_a / d x_b

Vec2 operator+(Vec2 a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
Vec2 operator-(Vec2 a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec2 operator*(Vec2 a, double k) { return {a[0] * k, a[1] * k}; }
Vec2 operator*(double k, Vec2 a) { return a * k; }

constexpr double kStep = 2e-3;

template <class F>
auto d1(const F& f, Point2 x, int dir)
{
    auto at = [&](double k) {
        Point2 y = x;
        (dir == 0 ? y.x1 : y.x3) += k * kStep;
        return f(y);
    };
    return (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) * (1.0 / (12.0 * kStep));
}

template <class F>
auto d2(const F& f, Point2 x, int dir)
{
    auto at = [&](double k) {
        Point2 y = x;
        (dir == 0 ? y.x1 : y.x3) += k * kStep;
        return f(y);
    };
    return (-1.0 * at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) * (1.0 / (12.0 * kStep * kStep));
}

Mat2 jacobian(const std::function<Vec2(const Point2&)>& u, const Point2& x)
{
    const Vec2 dx = d1(u, x, 0), dz = d1(u, x, 1);
    return {{{dx[0], dz[0]}, {dx[1], dz[1]}}};
}

Mat2 stress(const MediaParams& m, const Mat2& J)
{
    const cplx div = J[0][0] + J[1][1];
    Mat2 s;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s[a][b] = m.mu * (J[a][b] + J[b][a]) + (a == b ? m.lambda * div : 0.0);
    return s;
}

}  // namespace

Eigen::VectorXcd manufactured_residual(const FrequencyDiscretization& disc, cplx s, const ExactFields& exact)
{
    const StripMesh& mesh = disc.mesh();
    const DofMap& dofs = disc.dofs();
    const MediaParams& md = disc.media();
    const PmlProfile& pml = mesh.pml();
    const double h = mesh.h(), c2 = md.c * md.c;
    const cplx sinv = 1.0 / s, rs = md.rho0 * std::conj(s);
    const auto& P = exact.p;
    const auto& U = exact.u;

    // essential conditions
    const int nx = mesh.columns();
    double scale = 0.0, worst = 0.0;
    for (const auto& v : mesh.vertices()) scale = std::max(scale, std::abs(P(v)));
    for (std::size_t v = 0; v < mesh.vertices().size(); ++v) {
        const int row = static_cast<int>(v) / (nx + 1);
        const bool top = disc.variant() == Variant::PmlLayer && row == mesh.rows();
        if (row == 0 || top) worst = std::max(worst, std::abs(P(mesh.vertices()[v])));
    }
    if (worst > 1e-9 * std::max(1.0, scale))
        throw DomainError("exact pressure does not vanish on the Dirichlet boundary (max " + std::to_string(worst) + ")");

    Eigen::VectorXcd load = Eigen::VectorXcd::Zero(dofs.size());
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        const Region r = mesh.regions()[e];
        const bool fluid = dofs.includes(r), solid = r == Region::Solid;
        if (!fluid && !solid) continue;
        const auto el = element_geometry(mesh, static_cast<int>(e));
        const auto& t = mesh.triangles()[e];
        for (const auto& q : triangle_rule()) {
            const Point2 x = el.point(q.bary);
            const double w = el.area * q.weight;
            if (fluid) {
                cplx F;
                if (r == Region::Pml) {
                    const double sig = sigma_profile(x.x3, pml, h);
                    const double rr = (x.x3 - h) / pml.L();
                    const double dsig = pml.sigma0() / pml.s1() * pml.m() / pml.L() * std::pow(rr, pml.m() - 1);
                    F = -sig * d2(P, x, 0) - d2(P, x, 1) / sig + dsig / (sig * sig) * d1(P, x, 1) +
                        sig * s * s / c2 * P(x);
                } else {
                    F = -d2(P, x, 0) - d2(P, x, 1) + s * s / c2 * P(x);
                }
                for (int a = 0; a < 3; ++a) {
                    const int i = dofs.p[t[a]];
                    if (i >= 0) load[i] += sinv * w * F * q.bary[a];
                }
            } else {
                const Vec2 lap = d2(U, x, 0) + d2(U, x, 1);
                // grad(div u) from second derivatives of the components
                auto div = [&](const Point2& y) { const Mat2 J = jacobian(U, y); return J[0][0] + J[1][1]; };
                const cplx gdx = d1(div, x, 0), gdz = d1(div, x, 1);
                const Vec2 uu = U(x);
                const Vec2 F{md.rho_e * s * s * uu[0] - (md.lambda + md.mu) * gdx - md.mu * lap[0],
                             md.rho_e * s * s * uu[1] - (md.lambda + md.mu) * gdz - md.mu * lap[1]};
                for (int a = 0; a < 3; ++a)
                    for (int d = 0; d < 2; ++d) load[dofs.u[t[a]] + d] += rs * w * F[d] * q.bary[a];
            }
        }
    }

    for (const auto& edge : mesh.boundary_edges()) {
        if (edge.marker != Marker::Gamma) continue;
        const Point2 a = mesh.vertices()[edge.v0], b = mesh.vertices()[edge.v1];
        const double len = std::hypot(b.x1 - a.x1, b.x3 - a.x3);
        const Point2 n = edge.normal;
        for (const auto& [tq, wq] : edge_rule()) {
            const Point2 x{a.x1 + tq * (b.x1 - a.x1), a.x3 + tq * (b.x3 - a.x3)};
            const Vec2 uu = U(x);
            const cplx dpn = n.x1 * d1(P, x, 0) + n.x3 * d1(P, x, 1);
            const cplx g1 = dpn + md.rho0 * s * s * (n.x1 * uu[0] + n.x3 * uu[1]);
            const Mat2 S = stress(md, jacobian(U, x));
            const cplx px = P(x);
            const Vec2 g2{S[0][0] * n.x1 + S[0][1] * n.x3 + px * n.x1, S[1][0] * n.x1 + S[1][1] * n.x3 + px * n.x3};
            const std::array<double, 2> phi{1.0 - tq, tq};
            const std::array<int, 2> vs{edge.v0, edge.v1};
            for (int k = 0; k < 2; ++k) {
                const int i = dofs.p[vs[k]];
                if (i >= 0) load[i] -= sinv * len * wq * g1 * phi[k];
                for (int d = 0; d < 2; ++d) load[dofs.u[vs[k]] + d] += rs * len * wq * g2[d] * phi[k];
            }
        }
    }

    if (disc.variant() != Variant::PmlLayer) {
        // B[p] on Gamma_h from the sampled trace
        const double period = mesh.geometry().period;
        const int ns = 256, N = disc.n_modes();
        std::vector<cplx> samples(ns);
        for (int k = 0; k < ns; ++k) samples[k] = P({period * k / ns, h});
        const LaplaceFrequency sf(s);
        std::vector<cplx> bcoef(2 * N + 1);
        for (int j = -N; j <= N; ++j) {
            cplx acc = 0.0;
            for (int k = 0; k < ns; ++k) acc += samples[k] * std::exp(cplx(0.0, -2.0 * std::numbers::pi * j * k / ns));
            const FourierMode xi(2.0 * std::numbers::pi * j / period);
            const cplx sym = disc.variant() == Variant::ExactDtn ? dtn_symbol(xi, sf, md.c)
                                                                   : pml_dtn_symbol(xi, sf, md.c, pml.L_tilde());
            bcoef[j + N] = sym * acc / double(ns);
        }
        auto B = [&](double x1) {
            cplx acc = 0.0;
            for (int j = -N; j <= N; ++j) acc += bcoef[j + N] * std::exp(cplx(0.0, 2.0 * std::numbers::pi * j * x1 / period));
            return acc;
        };
        const auto& xs = dofs.gamma_h_x;
        const int m = static_cast<int>(dofs.gamma_h.size());
        for (int a = 0; a < m; ++a) {
            const double len = xs[a + 1] - xs[a];
            const std::array<int, 2> ids{dofs.p[dofs.gamma_h[a]], dofs.p[dofs.gamma_h[(a + 1) % m]]};
            for (const auto& [tq, wq] : edge_rule()) {
                const Point2 x{xs[a] + tq * len, h};
                const cplx gh = d1(P, x, 1) - B(x.x1);
                load[ids[0]] += sinv * len * wq * gh * (1.0 - tq);
                load[ids[1]] += sinv * len * wq * gh * tq;
            }
        }
    }
    return load;
}

FieldErrors field_errors(const FrequencyDiscretization& disc, const FrequencySolution& sol, const ExactFields& exact)
{
    const StripMesh& mesh = disc.mesh();
    const DofMap& dofs = disc.dofs();
    double pl2 = 0, ph1 = 0, ul2 = 0, uh1 = 0;
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        const Region r = mesh.regions()[e];
        const bool fluid = dofs.includes(r), solid = r == Region::Solid;
        if (!fluid && !solid) continue;
        const auto el = element_geometry(mesh, static_cast<int>(e));
        const auto& t = mesh.triangles()[e];
        if (fluid) {
            cplx gx = 0, gz = 0;
            for (int a = 0; a < 3; ++a) {
                gx += sol.p[t[a]] * el.grad[a][0];
                gz += sol.p[t[a]] * el.grad[a][1];
            }
            for (const auto& q : triangle_rule()) {
                const Point2 x = el.point(q.bary);
                const double w = el.area * q.weight;
                cplx ph = 0;
                for (int a = 0; a < 3; ++a) ph += q.bary[a] * sol.p[t[a]];
                pl2 += w * std::norm(ph - exact.p(x));
                ph1 += w * (std::norm(gx - d1(exact.p, x, 0)) + std::norm(gz - d1(exact.p, x, 1)));
            }
        } else {
            const std::array<const std::vector<cplx>*, 2> comp{&sol.u1, &sol.u2};
            Mat2 Jh{};
            for (int d = 0; d < 2; ++d)
                for (int a = 0; a < 3; ++a) {
                    Jh[d][0] += (*comp[d])[t[a]] * el.grad[a][0];
                    Jh[d][1] += (*comp[d])[t[a]] * el.grad[a][1];
                }
            for (const auto& q : triangle_rule()) {
                const Point2 x = el.point(q.bary);
                const double w = el.area * q.weight;
                const Vec2 ue = exact.u(x);
                const Mat2 J = jacobian(exact.u, x);
                for (int d = 0; d < 2; ++d) {
                    cplx uh = 0;
                    for (int a = 0; a < 3; ++a) uh += q.bary[a] * (*comp[d])[t[a]];
                    ul2 += w * std::norm(uh - ue[d]);
                    uh1 += w * (std::norm(Jh[d][0] - J[d][0]) + std::norm(Jh[d][1] - J[d][1]));
                }
            }
        }
    }
    return {std::sqrt(pl2), std::sqrt(ph1), std::sqrt(ul2), std::sqrt(uh1)};
}

void write_nodal_field(const std::string& path, const std::vector<cplx>& values)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "# node_id re im\n" << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ' ' << values[i].real() << ' ' << values[i].imag() << '\n';
}

}  // namespace tdpml
