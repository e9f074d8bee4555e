#include "tdpml/symbols.hpp"

#include "tdpml/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tdpml {

LaplaceFrequency::LaplaceFrequency(double s1, double s2) : s1_(s1), s2_(s2)
{
    if (!(s1 > 0.0) || !std::isfinite(s1) || !std::isfinite(s2))
        throw DomainError("Laplace frequency must satisfy Re s > 0");
}

cplx principal_sqrt(cplx z)
{
    const double z1 = z.real(), z2 = z.imag();
    if (z2 == 0.0 && z1 <= 0.0) throw DomainError("square root requested on the branch cut");
    const double r = std::abs(z);
    // Take the root of the non-cancelling half and recover the other from z2 = 2 wr wi.
    if (z1 >= 0.0) {
        const double wr = std::sqrt(0.5 * (r + z1));
        return {wr, z2 / (2.0 * wr)};
    }
    const double wi = std::sqrt(0.5 * (r - z1));
    const double wr = std::abs(z2) / (2.0 * wi);
    return {wr, std::copysign(wi, z2)};
}

cplx beta(const FourierMode& xi, const LaplaceFrequency& s, double c)
{
    const cplx sv = s.value();
    return principal_sqrt(sv * sv / (c * c) + xi.norm_sq());
}

cplx dtn_symbol(const FourierMode& xi, const LaplaceFrequency& s, double c)
{
    return -beta(xi, s, c);
}

namespace {

// coth(b L) written with q = e^{-2 b L}, |q| < 1 for Re b > 0.
cplx stable_coth(cplx b, double L_tilde)
{
    const cplx q = std::exp(-2.0 * b * L_tilde);
    const cplx den = 1.0 - q;
    if (std::abs(den) < 1e-14) throw DomainError("degenerate PML symbol: 1 - exp(-2 beta L) vanishes");
    return (1.0 + q) / den;
}

}  // namespace

cplx pml_dtn_symbol(const FourierMode& xi, const LaplaceFrequency& s, double c, double L_tilde)
{
    if (!(L_tilde > 0.0)) throw DomainError("stretched thickness must be positive");
    const cplx b = beta(xi, s, c);
    return -b * stable_coth(b, L_tilde);
}

double cu_bound(const LaplaceFrequency& s, double c, double L_bar)
{
    if (!(L_bar > 0.0)) throw DomainError("absorption thickness L_bar must be positive");
    const double q = std::exp(-2.0 * L_bar / c);
    return std::max(1.0, s.abs() / c) * 2.0 * q / (1.0 - q);
}

double weighted_symbol_gap(const FourierMode& xi, const LaplaceFrequency& s, double c, double L_tilde)
{
    const cplx b = beta(xi, s, c);
    const cplx q = std::exp(-2.0 * b * L_tilde);
    // 1 - coth = -2q / (1 - q)
    const double gap = std::abs(2.0 * q / (1.0 - q));
    const double x2 = xi.norm_sq();
    const double s_abs = s.abs();
    return std::sqrt(s_abs * s_abs / (c * c) + x2) / std::sqrt(1.0 + x2) * gap;
}

double weighted_gap_majorant(const FourierMode& xi, const LaplaceFrequency& s, double c, double L_tilde)
{
    const double br = beta(xi, s, c).real();
    const double q = std::exp(-2.0 * br * L_tilde);
    const double x2 = xi.norm_sq();
    const double s_abs = s.abs();
    return std::sqrt(s_abs * s_abs / (c * c) + x2) / std::sqrt(1.0 + x2) * 2.0 * q / (1.0 - q);
}

bool SymbolAudit::pass() const
{
    return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

double SymbolAudit::max_gap() const
{
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.gap);
    return m;
}

std::vector<double> default_xi_grid(const LaplaceFrequency& s, double c)
{
    const double top = 100.0 * std::max(1.0, s.abs() / c);
    std::vector<double> grid{0.0};
    const double lo = std::log(1e-3), hi = std::log(top);
    for (int k = 0; k < 400; ++k) grid.push_back(std::exp(lo + (hi - lo) * k / 399.0));
    return grid;
}

SymbolAudit symbol_gap_sup(const LaplaceFrequency& s, double c, const PmlProfile& pml,
                           const std::vector<double>& xi_grid)
{
    if (xi_grid.empty()) throw ConfigError("xi grid must be nonempty");
    // The stretching abscissa is the real part of s itself.
    const double Lt = pml.with_s1(s.s1()).L_tilde();
    const double bound = cu_bound(s, c, pml.L_bar());
    SymbolAudit audit;
    audit.records.reserve(xi_grid.size());
    for (double x : xi_grid) {
        const FourierMode xi(x);
        SymbolAuditRecord r;
        r.s1 = s.s1();
        r.s2 = s.s2();
        r.xi = x;
        r.beta = beta(xi, s, c);
        r.exact = -r.beta;
        r.pml = pml_dtn_symbol(xi, s, c, Lt);
        r.gap = weighted_symbol_gap(xi, s, c, Lt);
        r.bound = bound;
        r.pass = r.gap <= bound * (1.0 + 1e-10);
        audit.records.push_back(r);
    }
    return audit;
}

// ---------------------------------------------------------------------------
// BoundaryTrace

BoundaryTrace::BoundaryTrace(double period, int N) : period_(period), N_(N), coef_(2 * N + 1, 0.0)
{
    if (!(period > 0.0) || N < 0) throw ConfigError("invalid boundary trace dimensions");
}

BoundaryTrace::BoundaryTrace(double period, std::vector<cplx> coefficients)
    : period_(period), N_(static_cast<int>(coefficients.size() / 2)), coef_(std::move(coefficients))
{
    if (coef_.size() % 2 == 0) throw ConfigError("boundary trace needs 2N+1 coefficients");
}

BoundaryTrace BoundaryTrace::from_samples(double period, int N, const std::vector<cplx>& samples)
{
    BoundaryTrace t(period, N);
    const std::size_t m = samples.size();
    const double dx = period / static_cast<double>(m);
    for (int n = -N; n <= N; ++n) {
        cplx acc = 0.0;
        const double xi = t.xi(n);
        for (std::size_t j = 0; j < m; ++j) acc += samples[j] * std::exp(cplx(0.0, -xi * j * dx));
        t[n] = acc * dx;
    }
    return t;
}

double BoundaryTrace::xi(int n) const
{
    return 2.0 * std::numbers::pi * n / period_;
}

cplx BoundaryTrace::evaluate(double x) const
{
    cplx acc = 0.0;
    for (int n = -N_; n <= N_; ++n) acc += (*this)[n] * std::exp(cplx(0.0, xi(n) * x));
    return acc / period_;
}

bool BoundaryTrace::conjugate_symmetric(double tol) const
{
    double scale = 0.0;
    for (const auto& v : coef_) scale = std::max(scale, std::abs(v));
    for (int n = 0; n <= N_; ++n) {
        if (std::abs((*this)[n] - std::conj((*this)[-n])) > tol * std::max(1.0, scale)) return false;
    }
    return true;
}

BoundaryTrace& BoundaryTrace::operator+=(const BoundaryTrace& o)
{
    if (o.N_ != N_) throw ConfigError("boundary traces of different size");
    for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] += o.coef_[k];
    return *this;
}

BoundaryTrace& BoundaryTrace::operator-=(const BoundaryTrace& o)
{
    if (o.N_ != N_) throw ConfigError("boundary traces of different size");
    for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] -= o.coef_[k];
    return *this;
}

BoundaryTrace& BoundaryTrace::operator*=(cplx a)
{
    for (auto& v : coef_) v *= a;
    return *this;
}

BoundaryTrace apply_dtn(const BoundaryTrace& trace, const LaplaceFrequency& s, double c, DtnVariant variant,
                        double L_tilde)
{
    BoundaryTrace out(trace.period(), trace.N());
    for (int n = -trace.N(); n <= trace.N(); ++n) {
        const FourierMode xi(trace.xi(n));
        const cplx symbol = variant == DtnVariant::Exact ? dtn_symbol(xi, s, c) : pml_dtn_symbol(xi, s, c, L_tilde);
        out[n] = symbol * trace[n];
    }
    return out;
}

double trace_sobolev_norm(const BoundaryTrace& trace, double order)
{
    double acc = 0.0;
    for (int n = -trace.N(); n <= trace.N(); ++n) {
        const double x = trace.xi(n);
        acc += std::pow(1.0 + x * x, order) * std::norm(trace[n]);
    }
    return std::sqrt(acc * 2.0 * std::numbers::pi / trace.period());
}

bool PassivityReport::pass() const
{
    return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

PassivityReport modal_passivity_check(const LaplaceFrequency& s, double c, const std::vector<double>& xi_grid,
                                      double tol)
{
    PassivityReport rep;
    const cplx sv = s.value();
    for (double x : xi_grid) {
        const cplx b = beta(FourierMode(x), s, c);
        PassivityRecord r;
        r.xi = x;
        r.re_beta_over_s = (b / sv).real();
        r.ratio = std::abs(b) / (s.abs() * std::sqrt(1.0 + x * x));
        r.pass = r.re_beta_over_s >= -tol;
        rep.empirical_constant = std::max(rep.empirical_constant, r.ratio);
        rep.records.push_back(r);
    }
    return rep;
}

}  // namespace tdpml
