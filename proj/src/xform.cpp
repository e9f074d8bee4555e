#include "tdpml/xform.hpp"

#include "tdpml/error.hpp"
#include "tdpml/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tdpml {

SampledSignal SampledSignal::sample(const std::function<cplx(double)>& fn, double T_ext, int n_intervals)
{
    if (!(T_ext > 0.0) || n_intervals < 1) throw ConfigError("sampled signal needs T_ext > 0 and at least one interval");
    SampledSignal sig;
    sig.dt = T_ext / n_intervals;
    sig.values.resize(static_cast<std::size_t>(n_intervals) + 1);
    for (int k = 0; k <= n_intervals; ++k) sig.values[k] = fn(sig.dt * k);
    return sig;
}

void SampledSignal::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sampled signal: grid spacing must be positive");
    if (values.size() < 2) throw ConfigError("sampled signal: need at least two samples");
}

namespace {

// trapezoid sum of e^{-s t_k} values[k]; the exponential is advanced by
// multiplication and re-seeded every 64 steps to keep round-off flat
cplx trapezoid_laplace(const std::vector<cplx>& values, double dt, cplx s)
{
    const std::size_t n = values.size();
    const cplx step = std::exp(-s * dt);
    cplx e(1.0, 0.0), sum(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k % 64 == 0) e = std::exp(-s * (dt * static_cast<double>(k)));
        const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
        sum += w * e * values[k];
        e *= step;
    }
    return sum * dt;
}

}  // namespace

LaplaceValue laplace_numeric(const SampledSignal& sig, cplx s)
{
    sig.validate();
    if (!(s.real() > 0.0)) throw DomainError("laplace_numeric: Re s must be positive");
    LaplaceValue out;
    out.value = trapezoid_laplace(sig.values, sig.dt, s);
    const double T = sig.horizon();
    out.tail_bound = std::abs(sig.values.back()) * std::exp(-s.real() * T) / s.real();
    out.truncated = out.tail_bound > 1e-10 * std::abs(out.value);
    return out;
}

AnalyticSignal AnalyticSignal::zero()
{
    auto z = [](double) { return 0.0; };
    return {"zero", z, z, z};
}

AnalyticSignal AnalyticSignal::ramp()
{
    return {"t", [](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

AnalyticSignal AnalyticSignal::sine()
{
    return {"sin t", [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); },
            [](double t) { return -std::sin(t); }};
}

AnalyticSignal AnalyticSignal::decay(double rate)
{
    return {"exp(-" + std::to_string(rate) + " t)", [rate](double t) { return std::exp(-rate * t); },
            [rate](double t) { return -rate * std::exp(-rate * t); },
            [rate](double t) { return rate * rate * std::exp(-rate * t); }};
}

AnalyticSignal AnalyticSignal::pulse(const Pulse& p)
{
    return {"pulse", [p](double t) { return p.value(t); }, [p](double t) { return p.d1(t); },
            [p](double t) { return p.d2(t); }};
}

TransformResiduals transform_property_check(const AnalyticSignal& u, double T_ext, int n_intervals, cplx s)
{
    if (!(s.real() > 0.0)) throw DomainError("transform_property_check: Re s must be positive");
    auto lift = [](const std::function<double(double)>& f) { return [f](double t) { return cplx(f(t), 0.0); }; };
    const auto u0 = SampledSignal::sample(lift(u.f), T_ext, n_intervals);
    const auto u1 = SampledSignal::sample(lift(u.d1), T_ext, n_intervals);
    const auto u2 = SampledSignal::sample(lift(u.d2), T_ext, n_intervals);

    TransformResiduals r;
    const auto L0 = laplace_numeric(u0, s), L1 = laplace_numeric(u1, s), L2 = laplace_numeric(u2, s);
    for (const auto* lv : {&L0, &L1, &L2}) {
        if (lv->truncated) {
            std::ostringstream msg;
            msg << u.name << ": horizon " << T_ext << " leaves a tail up to " << lv->tail_bound;
            r.warnings.push_back(msg.str());
            break;
        }
    }
    const double f0 = u.f(0.0), df0 = u.d1(0.0);
    r.derivative = std::abs(L1.value - (s * L0.value - f0));
    r.second_derivative = std::abs(L2.value - (s * s * L0.value - s * f0 - df0));

    // running integral by the trapezoid rule, held constant past T_ext
    SampledSignal U;
    U.dt = u0.dt;
    U.values.resize(u0.values.size());
    U.values[0] = 0.0;
    for (std::size_t k = 1; k < U.values.size(); ++k)
        U.values[k] = U.values[k - 1] + 0.5 * u0.dt * (u0.values[k - 1] + u0.values[k]);
    const cplx LU = laplace_numeric(U, s).value + U.values.back() * std::exp(-s * T_ext) / s;
    r.integral = std::abs(LU - L0.value / s);
    return r;
}

ParsevalResult parseval_residual(const SampledSignal& u, const SampledSignal& v, double s1, const ParsevalOptions& opt)
{
    u.validate();
    v.validate();
    if (u.values.size() != v.values.size() || u.dt != v.dt) throw ConfigError("parseval: signals on different grids");
    if (!(s1 > 0.0)) throw DomainError("parseval: s1 must be positive");
    if (!(opt.s2_max > 0.0) || opt.n_s2 < 3 || opt.n_s2 % 2 == 0)
        throw ConfigError("parseval: need s2_max > 0 and an odd number (>= 3) of s2 points");

    ParsevalResult out;
    const std::size_t n = u.values.size();
    {
        cplx sum(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
            sum += w * std::exp(-2.0 * s1 * u.time(k)) * u.values[k] * std::conj(v.values[k]);
        }
        out.rhs = (sum * u.dt).real();
    }

    const int m = opt.n_s2;
    const double h = 2.0 * opt.s2_max / (m - 1);
    std::vector<cplx> g(m);
    auto is_real = [](const SampledSignal& x) {
        return std::all_of(x.values.begin(), x.values.end(), [](cplx c) { return c.imag() == 0.0; });
    };
    // real signals: g(-s2) = conj g(s2), so only s2 >= 0 is transformed
    const bool real = is_real(u) && is_real(v);
    const bool same = u.values == v.values;
    const int first = real ? m / 2 : 0;
    parallel_for(m - first, opt.jobs, [&](int i) {
        const int j = first + i;
        const cplx s(s1, -opt.s2_max + h * j);
        const cplx lu = laplace_numeric(u, s).value;
        g[j] = lu * std::conj(same ? lu : laplace_numeric(v, s).value);
    });
    if (real)
        for (int j = 0; j < first; ++j) g[j] = std::conj(g[m - 1 - j]);
    cplx sum(0.0, 0.0);
    for (int j = 0; j < m; ++j) sum += (j == 0 || j == m - 1 ? 0.5 : 1.0) * g[j];
    sum *= h;
    // beyond +-s2_max the product is taken to fall off like 1/s2^2
    const double tail = opt.s2_max * (g.front() + g.back()).real();
    out.tail = tail / (2.0 * std::numbers::pi);
    out.lhs = (sum.real() + tail) / (2.0 * std::numbers::pi);
    out.residual = std::abs(out.lhs - out.rhs);
    out.relative = out.rhs != 0.0 ? out.residual / std::abs(out.rhs) : out.residual;
    // the tail model is only trusted as a small correction
    if (std::abs(out.tail) > 1e-2 * std::abs(out.lhs)) {
        std::ostringstream msg;
        msg << "contour truncation: estimated tail " << out.tail << " beyond |s2| = " << opt.s2_max;
        out.warnings.push_back(msg.str());
    }
    if (laplace_numeric(u, cplx(s1, 0.0)).truncated || laplace_numeric(v, cplx(s1, 0.0)).truncated)
        out.warnings.push_back("time horizon too short: signal tail not negligible");
    return out;
}

}  // namespace tdpml
