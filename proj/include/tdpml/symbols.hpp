#pragma once
/**
 * @file symbols.hpp
 * @brief Fourier symbols of the exact and PML Dirichlet-to-Neumann maps.
 *
 * Fourier convention: phi_hat(xi) = int phi(x) e^{-i x.xi} dx (no prefactor),
 * inverse with (2 pi)^{-d}. On a periodic line of period Lambda the modes are
 * xi_n = 2 pi n / Lambda and phi(x) = Lambda^{-1} sum_n phi_hat_n e^{i xi_n x}.
 */

#include "tdpml/model.hpp"

#include <array>
#include <vector>

namespace tdpml {

/// s = s1 + i s2 with s1 > 0.
class LaplaceFrequency {
public:
    LaplaceFrequency(double s1, double s2);
    explicit LaplaceFrequency(cplx s) : LaplaceFrequency(s.real(), s.imag()) {}

    double s1() const { return s1_; }
    double s2() const { return s2_; }
    cplx value() const { return {s1_, s2_}; }
    double abs() const { return std::abs(value()); }

private:
    double s1_;
    double s2_;
};

/// Horizontal wavenumber, 1 (2D section) or 2 (3D) components.
class FourierMode {
public:
    explicit FourierMode(double xi) : xi_{xi, 0.0}, dim_(1) {}
    FourierMode(double xi1, double xi2) : xi_{xi1, xi2}, dim_(2) {}

    int dim() const { return dim_; }
    double operator[](int k) const { return xi_[k]; }
    double norm_sq() const { return xi_[0] * xi_[0] + xi_[1] * xi_[1]; }

private:
    std::array<double, 2> xi_;
    int dim_;
};

/// Principal square root with positive real part; DomainError on (-inf, 0].
cplx principal_sqrt(cplx z);

/// beta = sqrt(s^2/c^2 + |xi|^2), Re beta > 0.
cplx beta(const FourierMode& xi, const LaplaceFrequency& s, double c);

/// Symbol of the exact DtN map: -beta.
cplx dtn_symbol(const FourierMode& xi, const LaplaceFrequency& s, double c);

/// Symbol of the PML DtN map: -beta coth(beta L_tilde), evaluated through
/// e^{-2 beta L_tilde} only.
cplx pml_dtn_symbol(const FourierMode& xi, const LaplaceFrequency& s, double c, double L_tilde);

/// C_U(s, L_bar) = max{1, |s|/c} 2 e^{-2 L_bar/c} / (1 - e^{-2 L_bar/c}).
double cu_bound(const LaplaceFrequency& s, double c, double L_bar);

/**
 * Per-mode weighted gap (|s|^2/c^2 + |xi|^2)^{1/2} (1 + |xi|^2)^{-1/2}
 * |1 - coth(beta L_tilde)|. Its supremum over xi bounds the
 * H^{1/2} -> H^{-1/2} norm of the difference of the two DtN maps.
 */
double weighted_symbol_gap(const FourierMode& xi, const LaplaceFrequency& s, double c, double L_tilde);

/// Same weight times 2 e^{-2 Re(beta) L_tilde} / (1 - e^{-2 Re(beta) L_tilde}),
/// an upper bound of the gap that is monotone in L_tilde (the gap itself
/// oscillates in L_tilde when Im beta != 0).
double weighted_gap_majorant(const FourierMode& xi, const LaplaceFrequency& s, double c, double L_tilde);

struct SymbolAuditRecord {
    double s1;
    double s2;
    double xi;  ///< |xi|
    cplx beta;
    cplx exact;
    cplx pml;
    double gap;
    double bound;
    bool pass;
};

struct SymbolAudit {
    std::vector<SymbolAuditRecord> records;
    bool pass() const;
    double max_gap() const;
};

/// Default |xi| grid: 0 followed by 400 log-spaced points up to
/// 100 max(1, |s|/c).
std::vector<double> default_xi_grid(const LaplaceFrequency& s, double c);

/// Evaluates the weighted gap on a |xi| grid with L_tilde built from Re s;
/// a record passes iff gap <= cu_bound (1 + 1e-10).
SymbolAudit symbol_gap_sup(const LaplaceFrequency& s, double c, const PmlProfile& pml,
                           const std::vector<double>& xi_grid);

/// Modal coefficients phi_hat_n, |n| <= N, of a function on the periodic line.
class BoundaryTrace {
public:
    BoundaryTrace(double period, int N);
    BoundaryTrace(double period, std::vector<cplx> coefficients);

    /// Coefficients of a sampled function (uniform samples on [0, period)),
    /// trapezoid rule.
    static BoundaryTrace from_samples(double period, int N, const std::vector<cplx>& samples);

    double period() const { return period_; }
    int N() const { return N_; }
    double xi(int n) const;
    cplx& operator[](int n) { return coef_[n + N_]; }
    cplx operator[](int n) const { return coef_[n + N_]; }
    const std::vector<cplx>& coefficients() const { return coef_; }

    cplx evaluate(double x) const;
    bool conjugate_symmetric(double tol = 1e-12) const;

    BoundaryTrace& operator+=(const BoundaryTrace& o);
    BoundaryTrace& operator-=(const BoundaryTrace& o);
    BoundaryTrace& operator*=(cplx a);

private:
    double period_;
    int N_;
    std::vector<cplx> coef_;
};

enum class DtnVariant { Exact, Pml };

/// Modal multiplication by the chosen symbol (L_tilde used for Pml only).
BoundaryTrace apply_dtn(const BoundaryTrace& trace, const LaplaceFrequency& s, double c, DtnVariant variant,
                        double L_tilde = 0.0);

/// sqrt( sum_n (1 + xi_n^2)^order |phi_hat_n|^2 (2 pi / Lambda) ).
double trace_sobolev_norm(const BoundaryTrace& trace, double order);

struct PassivityRecord {
    double xi;
    double re_beta_over_s;
    double ratio;  ///< |beta| / (|s| (1 + xi^2)^{1/2})
    bool pass;
};

struct PassivityReport {
    std::vector<PassivityRecord> records;
    double empirical_constant = 0.0;  ///< max of ratio
    bool pass() const;
};

/// Re(beta/s) >= -tol on every grid point; reports the empirical constant of
/// the |beta| <= C |s| (1 + |xi|^2)^{1/2} bound.
PassivityReport modal_passivity_check(const LaplaceFrequency& s, double c, const std::vector<double>& xi_grid,
                                      double tol = 1e-14);

}  // namespace tdpml
