#pragma once
/**
 * @file xform.hpp
 * @brief Laplace transforms of sampled signals by trapezoid quadrature and
 * numerical checks of the transform rules and the Parseval identity on the
 * line Re s = s1.
 */

#include "tdpml/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tdpml {

/// Samples u(k dt), k = 0..n, on [0, T_ext].
struct SampledSignal {
    double dt = 0.0;
    std::vector<cplx> values;

    /// Samples fn on n_intervals + 1 uniform points of [0, T_ext].
    static SampledSignal sample(const std::function<cplx(double)>& fn, double T_ext, int n_intervals);

    double horizon() const { return dt * static_cast<double>(values.size() - 1); }
    double time(std::size_t k) const { return dt * static_cast<double>(k); }
    /// Throws ConfigError on dt <= 0 or fewer than two samples.
    void validate() const;
};

struct LaplaceValue {
    cplx value;
    double tail_bound = 0.0;  ///< |u(T_ext)| e^{-s1 T_ext} / s1, valid for non-growing u
    bool truncated = false;   ///< tail_bound above 1e-10 of |value|
};

/// Composite trapezoid approximation of int_0^T_ext e^{-st} u(t) dt.
/// Throws DomainError if Re s <= 0.
LaplaceValue laplace_numeric(const SampledSignal& sig, cplx s);

/// A real signal with closed-form first and second derivatives.
struct AnalyticSignal {
    std::string name;
    std::function<double(double)> f, d1, d2;

    static AnalyticSignal zero();
    static AnalyticSignal ramp();                 ///< t
    static AnalyticSignal sine();                 ///< sin t
    static AnalyticSignal decay(double rate);     ///< e^{-rate t}
    static AnalyticSignal pulse(const Pulse& p);  ///< the source pulse
};

struct TransformResiduals {
    double derivative = 0.0;         ///< |L(u') - (s L(u) - u(0))|
    double second_derivative = 0.0;  ///< |L(u'') - (s^2 L(u) - s u(0) - u'(0))|
    double integral = 0.0;           ///< |L(int_0^t u) - L(u)/s|
    std::vector<std::string> warnings;
};

/**
 * Residuals of the differentiation and integration rules on the grid with
 * n_intervals steps of [0, T_ext]. The integral rule is checked in forward
 * form: the running integral is formed by the trapezoid rule, and its value
 * is continued as a constant past T_ext.
 */
TransformResiduals transform_property_check(const AnalyticSignal& u, double T_ext, int n_intervals, cplx s);

struct ParsevalOptions {
    double s2_max = 200.0;
    int n_s2 = 4001;  ///< odd, symmetric grid on [-s2_max, s2_max]
    int jobs = 1;
};

struct ParsevalResult {
    double lhs = 0.0;       ///< (1/2 pi) int L(u) conj L(v) ds2, with tail correction
    double rhs = 0.0;       ///< int e^{-2 s1 t} u conj v dt
    double tail = 0.0;      ///< c/|s2| fit of the contribution beyond s2_max
    double residual = 0.0;  ///< |lhs - rhs|
    double relative = 0.0;  ///< residual / |rhs| (residual if rhs = 0)
    std::vector<std::string> warnings;  ///< e.g. tail above 1% of the lhs
};

/**
 * Both sides of the Parseval identity on Re s = s1 for two signals on the same
 * grid. The transforms come from laplace_numeric, so the two routes share no
 * closed form. Throws ConfigError on mismatched grids or a bad s2 grid,
 * DomainError on s1 <= 0.
 */
ParsevalResult parseval_residual(const SampledSignal& u, const SampledSignal& v, double s1,
                                 const ParsevalOptions& opt = {});

}  // namespace tdpml
