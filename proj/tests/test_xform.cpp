#include "doctest.h"

#include "gen.hpp"
#include "tdpml/error.hpp"
#include "tdpml/xform.hpp"

#include <cmath>

using namespace tdpml;

namespace {

SampledSignal sample_real(const std::function<double(double)>& f, double T, int n)
{
    return SampledSignal::sample([&](double t) { return cplx(f(t), 0.0); }, T, n);
}

}  // namespace

TEST_CASE("sampled signal grid")
{
    const auto sig = sample_real([](double t) { return t; }, 2.0, 4);
    CHECK(sig.values.size() == 5);
    CHECK(sig.dt == 0.5);
    CHECK(sig.horizon() == 2.0);
    CHECK(sig.values[0] == cplx(0.0));
    CHECK_THROWS_AS(SampledSignal::sample([](double) { return cplx(0.0); }, 0.0, 4), ConfigError);
    SampledSignal bad;
    bad.dt = 0.1;
    bad.values = {1.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(laplace_numeric(sig, cplx(0.0, 1.0)), DomainError);
}

TEST_CASE("laplace_numeric on closed-form pairs")
{
    const auto e = sample_real([](double t) { return std::exp(-t); }, 40.0, 40000);
    const auto le = laplace_numeric(e, 1.0);
    CHECK(std::abs(le.value - 0.5) < 1e-6);
    CHECK_FALSE(le.truncated);

    const auto r = sample_real([](double t) { return t; }, 40.0, 40000);
    const auto lr = laplace_numeric(r, 1.0);
    CHECK(std::abs(lr.value - 1.0) < 1e-6);

    const Pulse p;
    const auto w = sample_real([&](double t) { return p.value(t); }, 12.0, 12000);
    const cplx s(1.0, 1.0);
    CHECK(std::abs(laplace_numeric(w, s).value - p.laplace(s)) < 1e-6);
}

TEST_CASE("laplace_numeric flags a non-decaying tail")
{
    const auto one = sample_real([](double) { return 1.0; }, 5.0, 500);
    const auto lv = laplace_numeric(one, 1.0);
    CHECK(lv.truncated);
    CHECK(lv.tail_bound == doctest::Approx(std::exp(-5.0)));
    // value plus the exact tail recovers 1/s up to the trapezoid error
    CHECK(std::abs(lv.value + std::exp(-5.0) - 1.0) < 1e-4);
}

TEST_CASE("laplace_numeric error is second order in the step")
{
    const cplx s(1.0, 2.0);
    const cplx exact = 1.0 / (s + 1.0);
    double prev = 0.0;
    for (int n : {1000, 2000, 4000}) {
        const auto e = sample_real([](double t) { return std::exp(-t); }, 40.0, n);
        const double err = std::abs(laplace_numeric(e, s).value - exact);
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
        prev = err;
    }
}

TEST_CASE("laplace_numeric is linear in the signal")
{
    gen::Source g(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = g.integer(10, 400);
        const double T = g.uniform(1.0, 20.0);
        SampledSignal a, b, c;
        a.dt = b.dt = c.dt = T / n;
        const cplx alpha = g.complex_normal(), beta = g.complex_normal();
        for (int k = 0; k <= n; ++k) {
            a.values.push_back(g.complex_normal());
            b.values.push_back(g.complex_normal());
            c.values.push_back(alpha * a.values.back() + beta * b.values.back());
        }
        const cplx s(g.uniform(0.1, 3.0), g.uniform(-30.0, 30.0));
        const cplx lhs = laplace_numeric(c, s).value;
        const cplx rhs = alpha * laplace_numeric(a, s).value + beta * laplace_numeric(b, s).value;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("transform rules on analytic signals")
{
    const auto z = transform_property_check(AnalyticSignal::zero(), 10.0, 100, 1.0);
    CHECK(z.derivative == 0.0);
    CHECK(z.second_derivative == 0.0);
    CHECK(z.integral == 0.0);

    const auto sn = transform_property_check(AnalyticSignal::sine(), 40.0, 400000, cplx(1.0, 0.0));
    CHECK(sn.second_derivative <= 1e-8);

    for (const cplx s : {cplx(1.0, 0.0), cplx(1.0, 1.0), cplx(0.5, 3.0)}) {
        for (const auto& u : {AnalyticSignal::ramp(), AnalyticSignal::decay(1.0), AnalyticSignal::decay(3.0),
                              AnalyticSignal::pulse(Pulse{})}) {
            CAPTURE(u.name);
            CAPTURE(s);
            const auto r = transform_property_check(u, 80.0, 320000, s);
            CHECK(r.derivative <= 1e-6);
            CHECK(r.second_derivative <= 1e-6);
            CHECK(r.integral <= 1e-6);
            CHECK(r.warnings.empty());
        }
    }
    CHECK_THROWS_AS(transform_property_check(AnalyticSignal::ramp(), 10.0, 100, cplx(-1.0, 0.0)), DomainError);
}

TEST_CASE("transform residuals fall at second order under grid refinement")
{
    const cplx s(1.0, 2.0);
    const auto u = AnalyticSignal::decay(2.0);
    const auto a = transform_property_check(u, 30.0, 3000, s);
    const auto b = transform_property_check(u, 30.0, 6000, s);
    CHECK(a.derivative / b.derivative == doctest::Approx(4.0).epsilon(0.05));
    CHECK(a.integral / b.integral == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("short horizons are reported")
{
    const auto r = transform_property_check(AnalyticSignal::sine(), 3.0, 300, 1.0);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("Parseval identity for the exponential pair")
{
    // trapezoid transforms are off by dt^2 (s+1)/12 pointwise, so the window and step are chosen together
    const auto e = sample_real([](double t) { return std::exp(-t); }, 30.0, 240000);
    ParsevalOptions opt;
    opt.s2_max = 200.0;
    opt.n_s2 = 4001;
    opt.jobs = 4;
    const auto r = parseval_residual(e, e, 1.0, opt);
    CHECK(std::abs(r.rhs - 0.25) <= 1e-8);
    CHECK(std::abs(r.lhs - 0.25) <= 1e-6);
    CHECK(r.residual <= 1e-6);

    const auto zero = sample_real([](double) { return 0.0; }, 30.0, 240000);
    const auto rz = parseval_residual(zero, e, 1.0, opt);
    CHECK(rz.residual == 0.0);
}

TEST_CASE("Parseval identity for the default pulse")
{
    const Pulse p;
    const auto w = sample_real([&](double t) { return p.value(t); }, 14.0, 14000);
    ParsevalOptions opt;
    opt.s2_max = 200.0;
    opt.n_s2 = 4001;
    opt.jobs = 4;
    const auto r = parseval_residual(w, w, 0.5, opt);
    CHECK(r.relative <= 1e-5);
    CHECK(r.warnings.empty());
}

TEST_CASE("Parseval residual improves as the s2 window grows")
{
    const auto e = sample_real([](double t) { return std::exp(-t); }, 30.0, 30000);
    double prev = 1e300;
    for (double S : {25.0, 50.0, 100.0}) {
        ParsevalOptions opt;
        opt.s2_max = S;
        opt.n_s2 = static_cast<int>(20 * S) + 1;
        const auto r = parseval_residual(e, e, 1.0, opt);
        CHECK(r.residual < prev);
        prev = r.residual;
    }
}

TEST_CASE("Parseval argument checks")
{
    const auto a = sample_real([](double t) { return std::exp(-t); }, 10.0, 100);
    const auto b = sample_real([](double t) { return std::exp(-t); }, 10.0, 200);
    CHECK_THROWS_AS(parseval_residual(a, b, 1.0), ConfigError);
    CHECK_THROWS_AS(parseval_residual(a, a, 0.0), DomainError);
    ParsevalOptions even;
    even.n_s2 = 100;
    CHECK_THROWS_AS(parseval_residual(a, a, 1.0, even), ConfigError);
    ParsevalOptions narrow;
    narrow.s2_max = 5.0;
    narrow.n_s2 = 101;
    CHECK_FALSE(parseval_residual(a, a, 1.0, narrow).warnings.empty());
}
