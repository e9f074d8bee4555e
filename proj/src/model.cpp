#include "tdpml/model.hpp"

#include "tdpml/error.hpp"
#include "tdpml/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tdpml {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double layer_tolerance(const PmlProfile& pml, double h)
{
    return 1e-12 * std::max({1.0, std::abs(h), pml.L()});
}

}  // namespace

std::vector<std::string> validate_media(const MediaParams& p)
{
    std::vector<std::string> violations;
    if (!(p.c > 0.0)) violations.emplace_back("c>0");
    if (!(p.rho0 > 0.0)) violations.emplace_back("rho0>0");
    if (!(p.rho_e > 0.0)) violations.emplace_back("rho_e>0");
    if (!(p.mu >= 0.0)) violations.emplace_back("mu>=0");
    if (!(3.0 * p.lambda + 2.0 * p.mu >= 0.0)) violations.emplace_back("3*lambda+2*mu>=0");
    return violations;
}

PmlProfile::PmlProfile(double sigma0, int m, double L, double s1)
    : sigma0_(sigma0), m_(m), L_(L), s1_(s1)
{
    if (!(sigma0 >= 0.0) || !std::isfinite(sigma0))
        throw ConfigError("PML strength sigma0 must be nonnegative");
    if (m < 1) throw ConfigError("PML exponent m must be >= 1");
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("PML thickness L must be positive");
    if (!(s1 > 0.0) || !std::isfinite(s1)) throw ConfigError("Laplace abscissa s1 must be positive");
}

double PmlProfile::L_tilde() const
{
    return (1.0 + sigma0_ / (s1_ * (m_ + 1))) * L_;
}

double PmlProfile::L_bar() const
{
    return sigma0_ * L_ / (m_ + 1);
}

EffectiveThickness effective_thickness(const PmlProfile& pml)
{
    return {pml.L_tilde(), pml.L_bar()};
}

double sigma_profile(double x3, const PmlProfile& pml, double h)
{
    const double top = h + pml.L();
    if (x3 > top + layer_tolerance(pml, h))
        throw DomainError("x3 lies above the PML layer");
    if (x3 <= h) return 1.0;
    const double r = std::min((x3 - h) / pml.L(), 1.0);
    return 1.0 + pml.sigma0() / pml.s1() * std::pow(r, pml.m());
}

double stretched_coordinate(double x3, const PmlProfile& pml, double h)
{
    const double top = h + pml.L();
    if (x3 > top + layer_tolerance(pml, h))
        throw DomainError("x3 lies above the PML layer");
    if (x3 <= h) return x3;
    const double d = std::min(x3 - h, pml.L());
    const double r = d / pml.L();
    return x3 + pml.sigma0() / pml.s1() * pml.L() * std::pow(r, pml.m() + 1) / (pml.m() + 1);
}

// ---------------------------------------------------------------------------
// Surface

Surface::Surface(double period, double mean, std::vector<double> a, std::vector<double> b)
    : period_(period), mean_(mean), a_(std::move(a)), b_(std::move(b))
{
    if (!(period > 0.0)) throw ConfigError("surface period must be positive");
    // Dense sampling followed by golden-section refinement around each
    // sampled extremum.
    const int n = 4096 * std::max<std::size_t>(1, a_.size() / 8 + 1);
    const double dx = period_ / n;
    int imin = 0, imax = 0;
    double vmin = (*this)(0.0), vmax = vmin;
    for (int i = 1; i < n; ++i) {
        const double v = (*this)(i * dx);
        if (v < vmin) { vmin = v; imin = i; }
        if (v > vmax) { vmax = v; imax = i; }
    }
    auto refine = [&](int i, double sign) {
        double lo = (i - 1) * dx, hi = (i + 1) * dx;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 60; ++it) {
            const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
            if (sign * (*this)(x1) > sign * (*this)(x2)) hi = x2; else lo = x1;
        }
        return (*this)(0.5 * (lo + hi));
    };
    fmin_ = std::min(vmin, refine(imin, -1.0));
    fmax_ = std::max(vmax, refine(imax, +1.0));
}

Surface Surface::flat(double period, double level)
{
    return Surface(period, level, {}, {});
}

Surface Surface::cosine(double period, double amplitude, int k)
{
    if (k < 1) throw ConfigError("cosine surface frequency must be a positive integer");
    std::vector<double> a(k, 0.0), b(k, 0.0);
    a[k - 1] = amplitude;
    return Surface(period, 0.0, std::move(a), std::move(b));
}

Surface Surface::from_samples(double period, const std::vector<double>& values)
{
    const int n = static_cast<int>(values.size());
    if (n < 3) throw ConfigError("sampled surface needs at least 3 samples");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    const int kmax = n / 2;
    std::vector<double> a(kmax, 0.0), b(kmax, 0.0);
    for (int k = 1; k <= kmax; ++k) {
        const bool nyquist = (2 * k == n);
        const double w = nyquist ? 1.0 / n : 2.0 / n;
        double ca = 0.0, sb = 0.0;
        for (int j = 0; j < n; ++j) {
            const double th = two_pi * k * j / n;
            ca += values[j] * std::cos(th);
            sb += values[j] * std::sin(th);
        }
        a[k - 1] = w * ca;
        b[k - 1] = nyquist ? 0.0 : w * sb;
    }
    return Surface(period, mean, std::move(a), std::move(b));
}

Surface Surface::from_file(double period, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open surface file '" + path + "'");
    std::vector<double> xs, fs;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double x, f;
        if (ls >> x >> f) {
            xs.push_back(x);
            fs.push_back(f);
        }
    }
    if (fs.size() < 3) throw ConfigError("surface file '" + path + "' has fewer than 3 samples");
    const double dx = period / static_cast<double>(fs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i] - i * dx) > 1e-9 * period)
            throw ConfigError("surface file samples must be uniform on [0, period)");
    }
    return from_samples(period, fs);
}

Surface Surface::parse(double period, const std::string& spec)
{
    if (spec == "flat") return flat(period);
    if (spec.rfind("cosine:", 0) == 0) {
        const std::string args = spec.substr(7);
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw ConfigError("cosine surface expects 'cosine:amplitude,frequency'");
        double amp = 0.0, freq = 0.0;
        try {
            amp = std::stod(args.substr(0, comma));
            freq = std::stod(args.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse cosine surface '" + spec + "'");
        }
        if (std::abs(freq - std::round(freq)) > 1e-12 || freq < 1.0)
            throw ConfigError("cosine surface frequency must be a positive integer (periodicity)");
        return cosine(period, amp, static_cast<int>(std::round(freq)));
    }
    if (spec.rfind("file:", 0) == 0) return from_file(period, spec.substr(5));
    throw ConfigError("unknown surface specification '" + spec + "'");
}

double Surface::operator()(double x1) const
{
    double v = mean_;
    const double w = two_pi / period_;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double th = w * static_cast<double>(k + 1) * x1;
        v += a_[k] * std::cos(th) + b_[k] * std::sin(th);
    }
    return v;
}

double Surface::derivative(double x1) const
{
    double v = 0.0;
    const double w = two_pi / period_;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double wk = w * static_cast<double>(k + 1);
        v += wk * (-a_[k] * std::sin(wk * x1) + b_[k] * std::cos(wk * x1));
    }
    return v;
}

// ---------------------------------------------------------------------------
// Geometry

namespace {

double signed_area(const std::vector<Point2>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p.x1 * q.x3 - q.x1 * p.x3;
    }
    return 0.5 * a;
}

double cross(const Point2& o, const Point2& a, const Point2& b)
{
    return (a.x1 - o.x1) * (b.x3 - o.x3) - (a.x3 - o.x3) * (b.x1 - o.x1);
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d)
{
    const double d1 = cross(c, d, a), d2 = cross(c, d, b);
    const double d3 = cross(a, b, c), d4 = cross(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b)
{
    const double vx = b.x1 - a.x1, vz = b.x3 - a.x3;
    const double len2 = vx * vx + vz * vz;
    double t = len2 > 0 ? ((p.x1 - a.x1) * vx + (p.x3 - a.x3) * vz) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x1 - (a.x1 + t * vx), dz = p.x3 - (a.x3 + t * vz);
    return std::hypot(dx, dz);
}

}  // namespace

bool point_in_polygon(const Point2& p, const std::vector<Point2>& poly)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.x3 > p.x3) != (b.x3 > p.x3)) {
            const double x = a.x1 + (p.x3 - a.x3) * (b.x1 - a.x1) / (b.x3 - a.x3);
            if (p.x1 < x) inside = !inside;
        }
    }
    return inside;
}

double distance_to_polygon(const Point2& p, const std::vector<Point2>& poly)
{
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i)
        d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return d;
}

std::vector<Point2> validate_geometry(const Geometry& g)
{
    if (!(g.period > 0.0)) throw GeometryError("period must be positive");
    if (std::abs(g.surface.period() - g.period) > 1e-12 * g.period)
        throw GeometryError("surface period differs from the strip period");
    if (!(g.f_plus() < g.h)) throw GeometryError("surface maximum f+ must lie below h");

    std::vector<Point2> poly = g.obstacle;
    if (poly.empty()) return poly;
    if (poly.size() < 3) throw GeometryError("obstacle polygon needs at least 3 vertices");
    const double area = signed_area(poly);
    if (std::abs(area) < 1e-14) throw GeometryError("obstacle polygon is degenerate");
    if (area < 0) std::reverse(poly.begin(), poly.end());

    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                throw GeometryError("obstacle polygon is not simple");
        }
    }
    for (const auto& v : poly) {
        if (!(v.x1 > 0.0 && v.x1 < g.period))
            throw GeometryError("obstacle must lie strictly inside one lateral period");
        if (!(v.x3 < g.h)) throw GeometryError("obstacle must lie strictly below h");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        for (int k = 0; k <= 64; ++k) {
            const double t = k / 64.0;
            const double x1 = a.x1 + t * (b.x1 - a.x1), x3 = a.x3 + t * (b.x3 - a.x3);
            if (!(x3 > g.surface(x1))) throw GeometryError("obstacle touches the rough surface");
        }
    }
    return poly;
}

// ---------------------------------------------------------------------------
// Pulse and source

namespace {

// k-th derivative of t^3 e^{z t}.
cplx cubic_exp_derivative(double t, cplx z, int k)
{
    const double poly[4] = {t * t * t, 3.0 * t * t, 6.0 * t, 6.0};
    const int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    cplx acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += static_cast<double>(binom[k][j]) * poly[j] * std::pow(z, k - j);
    return acc * std::exp(z * t);
}

}  // namespace

double Pulse::value(double t) const
{
    return amplitude * cubic_exp_derivative(t, {-a, omega0}, 0).imag();
}

double Pulse::d1(double t) const
{
    return amplitude * cubic_exp_derivative(t, {-a, omega0}, 1).imag();
}

double Pulse::d2(double t) const
{
    return amplitude * cubic_exp_derivative(t, {-a, omega0}, 2).imag();
}

double Pulse::d3(double t) const
{
    return amplitude * cubic_exp_derivative(t, {-a, omega0}, 3).imag();
}

cplx Pulse::laplace(cplx s) const
{
    const cplx zp(-a, omega0), zm(-a, -omega0);
    const cplx i(0.0, 1.0);
    return amplitude * 6.0 * (1.0 / std::pow(s - zp, 4) - 1.0 / std::pow(s - zm, 4)) / (2.0 * i);
}

double bump(const Point2& x, const Point2& center, double radius, double period)
{
    double dx = x.x1 - center.x1;
    dx -= period * std::round(dx / period);
    const double dz = x.x3 - center.x3;
    const double r2 = (dx * dx + dz * dz) / (radius * radius);
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

SourceField make_source(const SourceSpec& spec, const StripMesh& mesh)
{
    const Geometry& g = mesh.geometry();
    if (!(spec.radius > 0.0) || !(spec.radius < 0.5 * g.period))
        throw GeometryError("source radius must lie in (0, period/2)");
    if (!(spec.horizon > 0.0)) throw ConfigError("source horizon T must be positive");
    const auto& c = spec.center;
    if (!(c.x3 + spec.radius < g.h)) throw GeometryError("source support crosses Gamma_h");
    for (int k = 0; k <= 256; ++k) {
        const double dx = spec.radius * (2.0 * k / 256.0 - 1.0);
        const double lower = c.x3 - std::sqrt(std::max(0.0, spec.radius * spec.radius - dx * dx));
        if (!(lower > g.surface(c.x1 + dx))) throw GeometryError("source support meets the rough surface");
    }
    if (!g.obstacle.empty()) {
        if (point_in_polygon(c, g.obstacle) || !(distance_to_polygon(c, g.obstacle) > spec.radius))
            throw GeometryError("source support meets the obstacle");
    }
    SourceField field;
    field.spec = spec;
    field.period = g.period;
    field.nodal.resize(mesh.vertices().size());
    for (std::size_t i = 0; i < mesh.vertices().size(); ++i)
        field.nodal[i] = bump(mesh.vertices()[i], spec.center, spec.radius, g.period);
    return field;
}

}  // namespace tdpml
