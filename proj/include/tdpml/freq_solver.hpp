#pragma once
/**
 * @file freq_solver.hpp
 * @brief Coupled fluid-solid problem at one complex frequency s.
 *
 * Unknown w = (p, u). With test (q, v) the form is
 *   a(w, w') = s^-1 int D grad p . grad q' + s int sigma/c^2 p q'
 *            - s^-1 int_{Gamma_h} B[p] q'              (DtN variants)
 *            - rho0 s int_Gamma (n.u) q' + rho0 conj(s) int_Gamma p (n.v')
 *            + rho0 conj(s) [lambda div u div v' + 2 mu eps(u):eps(v')]
 *            + rho0 rho_e |s|^2 s u.v'
 * (primes denote complex conjugated test functions) and the load is
 * g_hat(s) int chi/c^2 q'. As a matrix, a(w, w') = w'^H A w.
 */

#include "tdpml/fem.hpp"
#include "tdpml/symbols.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <string>

namespace tdpml {

enum class Variant { ExactDtn, PmlDtn, PmlLayer };

std::string to_string(Variant v);
/// Accepts "exact_dtn", "pml_dtn", "pml_layer"; throws ConfigError otherwise.
Variant parse_variant(const std::string& name);
Domain domain_of(Variant v);

struct FrequencySystem {
    Variant variant = Variant::ExactDtn;
    cplx s;
    SparseCplx A;
    Eigen::VectorXcd b;
    std::shared_ptr<const DofMap> dofs;
};

struct FrequencySolution {
    Variant variant = Variant::ExactDtn;
    cplx s;
    Eigen::VectorXcd x;       ///< dof vector [p; u]
    std::vector<cplx> p;      ///< per raw vertex (0 on Dirichlet vertices and the solid interior)
    std::vector<cplx> u1, u2; ///< per raw vertex (0 outside the solid)
    double residual = 0.0;    ///< ||Ax - b|| / ||b|| (0 for b = 0)
    int refinements = 0;
    std::shared_ptr<const DofMap> dofs;
};

/**
 * Everything that does not depend on s: dofs, real operators, the DtN mode
 * coefficients and a fixed sparsity pattern. Immutable after construction
 * and safe to share between threads.
 */
class FrequencyDiscretization {
public:
    FrequencyDiscretization(const StripMesh& mesh, const MediaParams& media, Variant variant, int n_modes = 64);

    const StripMesh& mesh() const { return *mesh_; }
    const MediaParams& media() const { return media_; }
    Variant variant() const { return variant_; }
    const DofMap& dofs() const { return *dofs_; }
    std::shared_ptr<const DofMap> dofs_ptr() const { return dofs_; }
    const SpatialOperators& ops() const { return ops_; }
    int n_modes() const { return n_modes_; }

    /// System matrix at s; every call returns the same sparsity pattern.
    SparseCplx matrix(cplx s) const;

    /// Unit-amplitude source vector int chi/c^2 q.
    Eigen::VectorXd source_vector(const SourceField& src) const;

    FrequencySystem assemble(cplx s, const Eigen::VectorXcd& rhs) const;
    FrequencySystem assemble(cplx s, const SourceField& src) const;

    /// Squared H-norm ||grad q||^2 + ||q||^2 + ||grad v||^2 + ||v||^2 of a dof vector.
    double h_norm_sq(const Eigen::VectorXcd& w) const;

private:
    std::shared_ptr<const StripMesh> mesh_;
    MediaParams media_;
    Variant variant_;
    int n_modes_;
    std::shared_ptr<const DofMap> dofs_;
    SpatialOperators ops_;
    SparseCplx pattern_;
    std::vector<std::vector<double>> component_values_;
    std::vector<int> dtn_slot_;          ///< value index for Gamma_h pair (a, b), row-major in (a, b)
    Eigen::MatrixXcd mode_coeffs_;       ///< (2N+1) x |Gamma_h| Fourier coefficients of the hat functions
};

/// Factorization with a reusable symbolic analysis. One per thread.
class FrequencySolver {
public:
    explicit FrequencySolver(const FrequencyDiscretization& disc);
    FrequencySolution solve(cplx s, const Eigen::VectorXcd& rhs);
    FrequencySolution solve(const FrequencySystem& sys);

private:
    const FrequencyDiscretization* disc_;
    Eigen::SparseLU<SparseCplx, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
};

/// One-shot assembly.
FrequencySystem assemble(const StripMesh& mesh, const MediaParams& media, cplx s, const SourceField& src,
                         Variant variant);

/// Fresh factorization of the given system.
FrequencySolution solve_frequency(const FrequencySystem& sys);

/// Unpacks a dof vector into per-vertex fields.
FrequencySolution unpack(const DofMap& dofs, const Eigen::VectorXcd& x);

struct CoercivityProbe {
    double re_a = 0.0;
    double h_norm_sq = 0.0;
};

CoercivityProbe coercivity_probe(const FrequencyDiscretization& disc, cplx s, const Eigen::VectorXcd& omega);

struct StabilityRatios {
    double grad_p = 0, s_p = 0;            ///< ||grad p||, ||s p||
    double grad_u = 0, div_u = 0, s_u = 0; ///< ||grad u||_F, ||div u||, ||s u||
    double fluid_bound = 0, solid_bound = 0;
    double fluid_ratio = 0, solid_ratio = 0;
};

/**
 * Fluid ratio (||grad p|| + ||s p||) / (|s|/s1 ||g||) and solid ratio
 * (||grad u|| + ||div u|| + ||s u||) / (||g|| / (s1 min(1, s1))) where
 * ||g|| = |g_hat(s)| ||chi||. For the PML variants the bounds carry the
 * extra factors (1 + sigma0/s1) and sqrt(1 + sigma0/s1). Norms are taken
 * over the fluid part of the computational domain.
 * Throws DomainError if g_norm = 0 while the solution is nonzero.
 */
StabilityRatios stability_ratios(const FrequencyDiscretization& disc, const FrequencySolution& sol, double g_norm);

/// Manufactured exact fields.
struct ExactFields {
    std::function<cplx(const Point2&)> p;
    std::function<std::array<cplx, 2>(const Point2&)> u;
};

/**
 * Load vector for which exact_fields solve the continuous problem: volume
 * residuals F_p = -div(D grad p) + sigma s^2/c^2 p, F_u = rho_e s^2 u - div sigma(u),
 * the Gamma_h mismatch dp/dx3 - B[p], and the interface mismatches
 * dp/dn + rho0 s^2 n.u and sigma(u) n + p n. Derivatives are taken by
 * fourth-order finite differences.
 * Throws DomainError if p does not vanish on the Dirichlet boundaries.
 */
Eigen::VectorXcd manufactured_residual(const FrequencyDiscretization& disc, cplx s, const ExactFields& exact);

struct FieldErrors {
    double p_l2 = 0, p_h1 = 0;  ///< L2 and H1-seminorm errors of the pressure
    double u_l2 = 0, u_h1 = 0;
};

FieldErrors field_errors(const FrequencyDiscretization& disc, const FrequencySolution& sol, const ExactFields& exact);

/// Writes "node_id re im" lines (and a header comment) for per-vertex values.
void write_nodal_field(const std::string& path, const std::vector<cplx>& values);

}  // namespace tdpml
