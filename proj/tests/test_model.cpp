#include "doctest.h"
#include "gen.hpp"

#include "tdpml/error.hpp"
#include "tdpml/mesh.hpp"
#include "tdpml/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

using namespace tdpml;

TEST_CASE("validate_media flags each violated constraint")
{
    CHECK(validate_media({1, 1, 1, 0, 0}).empty());

    MediaParams p;
    p.mu = 1;
    p.lambda = -1;
    auto v = validate_media(p);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "3*lambda+2*mu>=0");

    p = MediaParams{};
    p.mu = -0.1;
    v = validate_media(p);
    CHECK(std::find(v.begin(), v.end(), "mu>=0") != v.end());

    p = MediaParams{0, 0, 0, 1, 1};
    CHECK(validate_media(p).size() == 3);
}

TEST_CASE("sigma profile values")
{
    const PmlProfile pml(2, 1, 1, 1);
    CHECK(sigma_profile(1.0, pml, 1.0) == 1.0);
    CHECK(sigma_profile(1.5, pml, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sigma_profile(2.0, pml, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sigma_profile(-3.0, pml, 1.0) == 1.0);
    CHECK_THROWS_AS(sigma_profile(2.1, pml, 1.0), DomainError);
}

TEST_CASE("stretched coordinate values")
{
    const PmlProfile pml(2, 1, 1, 1);
    CHECK(stretched_coordinate(1.0, pml, 1.0) == 1.0);
    CHECK(stretched_coordinate(2.0, pml, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(stretched_coordinate(1.5, pml, 1.0) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK_THROWS_AS(stretched_coordinate(2.5, pml, 1.0), DomainError);
}

TEST_CASE("effective thickness")
{
    auto e = effective_thickness(PmlProfile(2, 1, 1, 1));
    CHECK(e.L_tilde == doctest::Approx(2.0));
    CHECK(e.L_bar == doctest::Approx(1.0));
    e = effective_thickness(PmlProfile(1, 1, 2, 0.5));
    CHECK(e.L_tilde == doctest::Approx(4.0));
    CHECK(e.L_bar == doctest::Approx(1.0));
    e = effective_thickness(PmlProfile(0, 1, 0.7, 1));
    CHECK(e.L_tilde == doctest::Approx(0.7));
    CHECK(e.L_bar == 0.0);
    CHECK_THROWS_AS(PmlProfile(-1, 1, 1, 1), ConfigError);
    CHECK_THROWS_AS(PmlProfile(1, 0, 1, 1), ConfigError);
    CHECK_THROWS_AS(PmlProfile(1, 1, 0, 1), ConfigError);
    CHECK_THROWS_AS(PmlProfile(1, 1, 1, 0), ConfigError);
}

TEST_CASE("property: sigma is continuous, monotone and bounded")
{
    gen::Source g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const PmlProfile pml(g.uniform(0.1, 10), g.integer(1, 4), g.uniform(0.1, 3), g.uniform(0.05, 2));
        const double h = g.uniform(-1, 2);
        double prev = sigma_profile(h - 0.5, pml, h);
        for (int k = 0; k <= 400; ++k) {
            const double x3 = h - 0.5 + (pml.L() + 0.5) * k / 400.0;
            const double s = sigma_profile(x3, pml, h);
            CHECK(s >= prev);
            CHECK(s >= 1.0);
            CHECK(s <= 1.0 + pml.sigma0() / pml.s1() + 1e-12);
            prev = s;
        }
        CHECK(sigma_profile(h + 1e-12, pml, h) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(effective_thickness(pml).L_tilde == doctest::Approx(pml.L() + pml.L_bar() / pml.s1()));
        CHECK(pml.L_tilde() > pml.L());
    }
}

TEST_CASE("property: stretched coordinate matches quadrature of sigma")
{
    gen::Source g(12);
    for (int trial = 0; trial < 50; ++trial) {
        const PmlProfile pml(g.uniform(0.1, 10), g.integer(1, 4), g.uniform(0.1, 3), g.uniform(0.05, 2));
        const double h = g.uniform(-1, 2);
        const double x3 = h + g.uniform(0, 1) * pml.L();
        // Composite Gauss-Legendre (5 points), exact for the polynomial profile.
        const double xg[5] = {-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683,
                              0.906179845938664};
        const double wg[5] = {0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366,
                              0.236926885056189};
        double integral = 0;
        const int panels = 16;
        for (int p = 0; p < panels; ++p) {
            const double a = h + (x3 - h) * p / panels, b = h + (x3 - h) * (p + 1) / panels;
            for (int q = 0; q < 5; ++q)
                integral += 0.5 * (b - a) * wg[q] * sigma_profile(0.5 * (a + b) + 0.5 * (b - a) * xg[q], pml, h);
        }
        const double exact = stretched_coordinate(x3, pml, h) - h;
        CHECK(std::abs(exact - integral) <= 1e-10 * std::max(1.0, std::abs(exact)));
        CHECK(stretched_coordinate(h + pml.L(), pml, h) - h == doctest::Approx(pml.L_tilde()).epsilon(1e-12));
    }
}

TEST_CASE("surface construction and extrema")
{
    const auto flat = Surface::flat(1.0, 0.2);
    CHECK(flat(0.37) == doctest::Approx(0.2));
    CHECK(flat.min() == doctest::Approx(0.2));
    CHECK(flat.max() == doctest::Approx(0.2));

    const auto cs = Surface::parse(2.0, "cosine:0.1,3");
    CHECK(cs(0.0) == doctest::Approx(0.1));
    CHECK(cs(1.0 / 3.0) == doctest::Approx(-0.1));
    CHECK(cs.max() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cs.min() == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(cs.derivative(0.1) == doctest::Approx(-0.1 * 3 * M_PI * std::sin(3 * M_PI * 0.1)));

    std::vector<double> samples(32);
    for (int i = 0; i < 32; ++i) samples[i] = 0.05 * std::sin(2 * M_PI * i / 32.0) + 0.01;
    const auto fs = Surface::from_samples(1.0, samples);
    CHECK(fs(0.3) == doctest::Approx(0.05 * std::sin(2 * M_PI * 0.3) + 0.01).epsilon(1e-12));
    CHECK(fs.max() == doctest::Approx(0.06).epsilon(1e-10));

    const std::string path = "/tmp/tdpml_surface_test.txt";
    {
        std::ofstream os(path);
        for (int i = 0; i < 32; ++i) os << i / 32.0 << ' ' << samples[i] << '\n';
    }
    const auto ff = Surface::parse(1.0, "file:" + path);
    CHECK(ff(0.3) == doctest::Approx(fs(0.3)));

    CHECK_THROWS_AS(Surface::parse(1.0, "wavy"), ConfigError);
    CHECK_THROWS_AS(Surface::parse(1.0, "cosine:0.1,0"), ConfigError);
}

TEST_CASE("geometry validation")
{
    Geometry g;
    g.surface = Surface::cosine(1.0, 0.1, 1);
    g.obstacle = {{0.4, 0.4}, {0.4, 0.6}, {0.6, 0.6}, {0.6, 0.4}};  // clockwise
    const auto poly = validate_geometry(g);
    double area = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        area += a.x1 * b.x3 - b.x1 * a.x3;
    }
    CHECK(area > 0);

    Geometry bad = g;
    bad.h = 0.1;
    CHECK_THROWS_AS(validate_geometry(bad), GeometryError);
    bad = g;
    bad.obstacle = {{0.05, 0.05}, {0.2, 0.05}, {0.2, 0.3}, {0.05, 0.3}};
    CHECK_THROWS_AS(validate_geometry(bad), GeometryError);
    bad = g;
    bad.obstacle = {{0.4, 0.4}, {0.6, 0.6}, {0.6, 0.4}, {0.4, 0.6}};
    CHECK_THROWS_AS(validate_geometry(bad), GeometryError);
    bad = g;
    bad.obstacle = {{0.4, 0.8}, {0.6, 0.8}, {0.6, 1.1}, {0.4, 1.1}};
    CHECK_THROWS_AS(validate_geometry(bad), GeometryError);
}

TEST_CASE("pulse vanishes to second order at t = 0")
{
    const Pulse w;
    CHECK(w.value(0) == 0.0);
    CHECK(w.d1(0) == 0.0);
    CHECK(w.d2(0) == 0.0);
    CHECK(w.d3(0.01) != 0.0);

    // Derivatives against central differences.
    for (double t : {0.1, 0.4, 1.3}) {
        const double e = 1e-5;
        CHECK(w.d1(t) == doctest::Approx((w.value(t + e) - w.value(t - e)) / (2 * e)).epsilon(1e-7));
        CHECK(w.d2(t) == doctest::Approx((w.d1(t + e) - w.d1(t - e)) / (2 * e)).epsilon(1e-7));
        CHECK(w.d3(t) == doctest::Approx((w.d2(t + e) - w.d2(t - e)) / (2 * e)).epsilon(1e-7));
    }

    // Closed-form transform at s = 1 + i; reference from extended-precision quadrature.
    const cplx L = w.laplace({1.0, 1.0});
    CHECK(L.real() == doctest::Approx(-0.0000847029165645460593).epsilon(1e-12));
    CHECK(L.imag() == doctest::Approx(0.000156366904824050866).epsilon(1e-12));
}

TEST_CASE("property: third derivative of the pulse is square integrable")
{
    const Pulse w;
    double prev = 0;
    for (int n : {1000, 2000, 4000, 8000}) {
        const double T = 2.0, dt = T / n;
        double acc = 0;
        for (int k = 0; k <= n; ++k) {
            const double t = k * dt;
            const double d3 = (w.d2(t + 0.5 * dt) - w.d2(std::max(0.0, t - 0.5 * dt))) / (t == 0 ? 0.5 * dt : dt);
            acc += (k == 0 || k == n ? 0.5 : 1.0) * d3 * d3 * dt;
        }
        CHECK(std::isfinite(acc));
        if (prev > 0) CHECK(std::abs(acc - prev) < 0.01 * prev);
        prev = acc;
    }
    CHECK(prev == doctest::Approx(9.87810713370768).epsilon(1e-3));
}

TEST_CASE("bump profile")
{
    CHECK(bump({0.3, 0.5}, {0.3, 0.5}, 0.1, 1.0) == 1.0);
    CHECK(bump({0.4, 0.5}, {0.3, 0.5}, 0.1, 1.0) == 0.0);
    CHECK(bump({0.3, 0.65}, {0.3, 0.5}, 0.1, 1.0) == 0.0);
    // periodic lateral distance
    CHECK(bump({0.98, 0.5}, {0.02, 0.5}, 0.1, 1.0) == doctest::Approx(bump({0.06, 0.5}, {0.02, 0.5}, 0.1, 1.0)));
}

TEST_CASE("make_source checks the support")
{
    Geometry g;
    g.surface = Surface::cosine(1.0, 0.1, 1);
    g.obstacle = {{0.4, 0.35}, {0.6, 0.35}, {0.6, 0.55}, {0.4, 0.55}};
    const auto mesh = build_mesh(g, PmlProfile(2, 1, 0.5, 0.5), 0.1);

    SourceSpec spec;
    spec.center = {0.2, 0.75};
    spec.radius = 0.12;
    const auto src = make_source(spec, mesh);
    REQUIRE(src.nodal.size() == mesh.vertices().size());
    for (std::size_t i = 0; i < src.nodal.size(); ++i) {
        const auto& v = mesh.vertices()[i];
        const double r = std::hypot(v.x1 - 0.2, v.x3 - 0.75);
        if (r >= 0.12) CHECK(src.nodal[i] == 0.0);
    }

    spec.center = {0.5, 0.6};
    CHECK_THROWS_AS(make_source(spec, mesh), GeometryError);
    spec.center = {0.2, 0.95};
    CHECK_THROWS_AS(make_source(spec, mesh), GeometryError);
    spec.center = {0.2, 0.15};
    CHECK_THROWS_AS(make_source(spec, mesh), GeometryError);
}
