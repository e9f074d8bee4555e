#pragma once
/**
 * @file layer_bvp.hpp
 * @brief Per-mode two-point problem inside the PML layer
 *
 *     d/dx3 (sigma^{-1} dv/dx3) - sigma (s^2/c^2 + |xi|^2) v = 0,  h < x3 < h + L,
 *     v(h) = phi,  v(h + L) = 0.
 */

#include "tdpml/symbols.hpp"

#include <vector>

namespace tdpml {

struct LayerMode {
    FourierMode xi{0.0};
    LaplaceFrequency s{1.0, 0.0};
    double c = 1.0;
    PmlProfile pml{1.0, 1, 1.0, 1.0};
    double h = 0.0;
    cplx phi = 1.0;  ///< boundary value at x3 = h
};

struct LayerSolution {
    std::vector<double> x3;
    std::vector<cplx> v;
};

/// Closed-form solution at x3 in [h, h+L], written with decaying
/// exponentials only.
cplx analytic_layer_solution(const LayerMode& mode, double x3);

/// Conservative three-point scheme on n uniform intervals (n + 1 nodes),
/// midpoint values of 1/sigma, Thomas elimination. Requires n >= 8.
LayerSolution fd_layer_solve(const LayerMode& mode, int n);

/// Second-order one-sided derivative at x3 = h (sigma(h) = 1).
cplx numeric_dtn_at_h(const LayerSolution& sol);

/// Max-norm of the discrete operator applied to the analytic nodal values,
/// scaled like the differential equation (the local truncation error).
double layer_truncation_error(const LayerMode& mode, int n);

/// Max nodal error of fd_layer_solve against the analytic solution.
double layer_max_error(const LayerMode& mode, int n);

}  // namespace tdpml
