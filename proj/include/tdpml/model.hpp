#pragma once
/**
 * @file model.hpp
 * @brief Physical parameters, strip geometry, PML profile and source pulses.
 */

#include <complex>
#include <string>
#include <vector>

namespace tdpml {

using cplx = std::complex<double>;

/// A point of the 2D section (x1 lateral, x3 vertical).
struct Point2 {
    double x1 = 0.0;
    double x3 = 0.0;
};

/// Physical constants of the fluid and of the elastic inclusion.
struct MediaParams {
    double c = 1.0;       ///< sound speed of the fluid
    double rho0 = 1.0;    ///< fluid density
    double rho_e = 1.0;   ///< solid density
    double lambda = 1.0;  ///< Lame constant
    double mu = 1.0;      ///< Lame constant (shear modulus)
};

/// Returns the list of violated admissibility constraints (empty when valid).
std::vector<std::string> validate_media(const MediaParams& p);

/**
 * @brief PML layer description.
 *
 * The medium property is 1 below x3 = h and 1 + sigma0/s1 ((x3-h)/L)^m inside
 * the layer. sigma0 = 0 is accepted and describes a plain Dirichlet truncation
 * at x3 = h + L.
 */
class PmlProfile {
public:
    PmlProfile(double sigma0, int m, double L, double s1);

    double sigma0() const { return sigma0_; }
    int m() const { return m_; }
    double L() const { return L_; }
    double s1() const { return s1_; }

    /// Stretched thickness (1 + sigma0/(s1 (m+1))) L.
    double L_tilde() const;
    /// Absorption thickness sigma0 L / (m+1).
    double L_bar() const;

    PmlProfile with_thickness(double L) const { return {sigma0_, m_, L, s1_}; }
    PmlProfile with_sigma0(double sigma0) const { return {sigma0, m_, L_, s1_}; }
    PmlProfile with_s1(double s1) const { return {sigma0_, m_, L_, s1}; }

private:
    double sigma0_;
    int m_;
    double L_;
    double s1_;
};

struct EffectiveThickness {
    double L_tilde;
    double L_bar;
};

EffectiveThickness effective_thickness(const PmlProfile& pml);

/// sigma(x3); throws DomainError above h + L.
double sigma_profile(double x3, const PmlProfile& pml, double h);

/// Real stretched coordinate: x3 below h, h + int_h^x3 sigma above.
double stretched_coordinate(double x3, const PmlProfile& pml, double h);

/**
 * @brief Lateral profile f(x1) of the rough bottom, stored as a real
 * trigonometric polynomial of period Lambda (hence smooth and periodic).
 */
class Surface {
public:
    static Surface flat(double period, double level = 0.0);
    /// amplitude * cos(2 pi k x1 / period); k must be a positive integer.
    static Surface cosine(double period, double amplitude, int k);
    /// Trigonometric interpolant of uniform samples on [0, period).
    static Surface from_samples(double period, const std::vector<double>& values);
    /// Two-column text file (x1 f), uniform samples on [0, period).
    static Surface from_file(double period, const std::string& path);
    /// Parses "flat" | "cosine:amplitude,frequency" | "file:<path>".
    static Surface parse(double period, const std::string& spec);

    double operator()(double x1) const;
    double derivative(double x1) const;
    double period() const { return period_; }
    double min() const { return fmin_; }
    double max() const { return fmax_; }

private:
    Surface(double period, double mean, std::vector<double> a, std::vector<double> b);

    double period_;
    double mean_;
    std::vector<double> a_;  // cosine coefficients, modes 1..K
    std::vector<double> b_;  // sine coefficients
    double fmin_ = 0.0;
    double fmax_ = 0.0;
};

/// Strip geometry: periodic rough bottom, truncation height and elastic obstacle.
struct Geometry {
    double period = 1.0;
    Surface surface = Surface::flat(1.0);
    double h = 1.0;
    std::vector<Point2> obstacle;  ///< simple polygon, empty for no inclusion

    double f_minus() const { return surface.min(); }
    double f_plus() const { return surface.max(); }
};

/// Throws GeometryError unless f+ < h and the obstacle lies strictly inside
/// the fluid strip. Returns the obstacle reoriented counter-clockwise.
std::vector<Point2> validate_geometry(const Geometry& g);

bool point_in_polygon(const Point2& p, const std::vector<Point2>& poly);
double distance_to_polygon(const Point2& p, const std::vector<Point2>& poly);

/**
 * @brief Ramped pulse w(t) = A t^3 e^{-a t} sin(omega0 t).
 *
 * The t^3 factor makes w, w' and w'' vanish at t = 0; w''' is bounded.
 */
struct Pulse {
    double a = 6.0;
    double omega0 = 8.0;
    double amplitude = 1.0;

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
    double d3(double t) const;
    /// Closed-form Laplace transform, valid for Re s > -a.
    cplx laplace(cplx s) const;
};

struct SourceSpec {
    Point2 center{0.25, 0.6};
    double radius = 0.1;
    Pulse pulse;
    double horizon = 2.0;  ///< final time T
};

/// C-infinity bump exp(1 - 1/(1 - r^2/R^2)) with unit peak; lateral distance
/// measured periodically.
double bump(const Point2& x, const Point2& center, double radius, double period);

/// Separable source g(x, t) = chi(x) w(t).
struct SourceField {
    SourceSpec spec;
    double period = 1.0;
    std::vector<double> nodal;  ///< chi at the mesh vertices

    double spatial(const Point2& x) const { return bump(x, spec.center, spec.radius, period); }
    double time(double t) const { return spec.pulse.value(t); }
    double time_d1(double t) const { return spec.pulse.d1(t); }
    cplx laplace(cplx s) const { return spec.pulse.laplace(s); }
};

class StripMesh;

/// Builds the separable source; throws GeometryError when the support ball
/// leaves Omega_h or meets the obstacle.
SourceField make_source(const SourceSpec& spec, const StripMesh& mesh);

}  // namespace tdpml
