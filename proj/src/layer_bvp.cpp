#include "tdpml/layer_bvp.hpp"

#include "tdpml/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tdpml {

namespace {

cplx layer_wavenumber_sq(const LayerMode& m)
{
    const cplx s = m.s.value();
    return s * s / (m.c * m.c) + m.xi.norm_sq();
}

// Coefficients of the scaled scheme a_-(v_{j-1}) + d v_j + a_+(v_{j+1}) = 0.
struct Stencil {
    double lo;
    cplx diag;
    double hi;
};

Stencil stencil(const LayerMode& m, int j, double dx)
{
    const double top = m.h + m.pml.L();
    const double x = m.h + j * dx;
    const double am = 1.0 / sigma_profile(x - 0.5 * dx, m.pml, m.h);
    const double ap = 1.0 / sigma_profile(std::min(x + 0.5 * dx, top), m.pml, m.h);
    const double sig = sigma_profile(std::min(x, top), m.pml, m.h);
    return {am / (dx * dx), -(am + ap) / (dx * dx) - sig * layer_wavenumber_sq(m), ap / (dx * dx)};
}

}  // namespace

cplx analytic_layer_solution(const LayerMode& mode, double x3)
{
    const double top = mode.h + mode.pml.L();
    const double tol = 1e-12 * std::max({1.0, std::abs(mode.h), mode.pml.L()});
    if (x3 < mode.h - tol || x3 > top + tol) throw DomainError("x3 outside the PML layer");
    x3 = std::clamp(x3, mode.h, top);
    const cplx b = beta(mode.xi, mode.s, mode.c);
    const double Lt = mode.pml.L_tilde();
    const double y = stretched_coordinate(x3, mode.pml, mode.h) - mode.h;
    const cplx num = std::exp(-b * y) - std::exp(b * (y - 2.0 * Lt));
    const cplx den = 1.0 - std::exp(-2.0 * b * Lt);
    return mode.phi * num / den;
}

LayerSolution fd_layer_solve(const LayerMode& mode, int n)
{
    if (n < 8) throw DomainError("layer grid needs at least 8 intervals");
    const double dx = mode.pml.L() / n;
    LayerSolution sol;
    sol.x3.resize(n + 1);
    sol.v.assign(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) sol.x3[j] = j == n ? mode.h + mode.pml.L() : mode.h + j * dx;
    sol.v[0] = mode.phi;

    // Thomas elimination on the interior unknowns 1..n-1.
    const int m = n - 1;
    std::vector<cplx> cprime(m), dprime(m);
    double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
        const int j = k + 1;
        const Stencil st = stencil(mode, j, dx);
        cplx rhs = 0.0;
        if (j == 1) rhs -= st.lo * mode.phi;
        cplx denom = st.diag;
        if (k > 0) {
            denom -= st.lo * cprime[k - 1];
            rhs -= st.lo * dprime[k - 1];
        }
        max_pivot = std::max(max_pivot, std::abs(denom));
        min_pivot = std::min(min_pivot, std::abs(denom));
        if (std::abs(denom) < 1e-14 * max_pivot)
            throw SolverError("layer system is numerically singular (pivot ratio " +
                              std::to_string(min_pivot / max_pivot) + ")");
        cprime[k] = (j == n - 1) ? cplx(0.0) : st.hi / denom;
        dprime[k] = rhs / denom;
    }
    for (int k = m - 1; k >= 0; --k) {
        sol.v[k + 1] = dprime[k] - (k + 1 < m ? cprime[k] * sol.v[k + 2] : cplx(0.0));
    }
    return sol;
}

cplx numeric_dtn_at_h(const LayerSolution& sol)
{
    if (sol.v.size() < 9) throw DomainError("layer grid too coarse for the derivative at h");
    const double dx = sol.x3[1] - sol.x3[0];
    return (-3.0 * sol.v[0] + 4.0 * sol.v[1] - sol.v[2]) / (2.0 * dx);
}

double layer_truncation_error(const LayerMode& mode, int n)
{
    if (n < 8) throw DomainError("layer grid needs at least 8 intervals");
    const double dx = mode.pml.L() / n;
    std::vector<cplx> exact(n + 1);
    for (int j = 0; j <= n; ++j) exact[j] = analytic_layer_solution(mode, j == n ? mode.h + mode.pml.L() : mode.h + j * dx);
    double err = 0.0;
    for (int j = 1; j < n; ++j) {
        const Stencil st = stencil(mode, j, dx);
        err = std::max(err, std::abs(st.lo * exact[j - 1] + st.diag * exact[j] + st.hi * exact[j + 1]));
    }
    return err;
}

double layer_max_error(const LayerMode& mode, int n)
{
    const auto sol = fd_layer_solve(mode, n);
    double err = 0.0;
    for (std::size_t j = 0; j < sol.v.size(); ++j)
        err = std::max(err, std::abs(sol.v[j] - analytic_layer_solution(mode, sol.x3[j])));
    return err;
}

}  // namespace tdpml
