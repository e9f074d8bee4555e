#pragma once
/**
 * @file fem.hpp
 * @brief P1 spaces for pressure and displacement on a StripMesh and the real
 * matrices every solver is assembled from.
 *
 * Unknowns: pressure at fluid vertices (minus Dirichlet vertices), then two
 * displacement components per solid vertex. Periodic vertices share the dof
 * of their canonical image.
 */

#include "tdpml/mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

namespace tdpml {

using SparseReal = Eigen::SparseMatrix<double>;
using SparseCplx = Eigen::SparseMatrix<cplx>;

/// Fluid part of the computational domain.
enum class Domain {
    OmegaH,   ///< fluid elements below Gamma_h
    OmegaHL,  ///< fluid and PML elements; Dirichlet on Gamma_{h+L}
};

struct QuadPoint {
    std::array<double, 3> bary;
    double weight;  ///< fraction of the element area
};

/// Symmetric 7-point rule, exact for degree 5.
const std::array<QuadPoint, 7>& triangle_rule();

/// 3-point Gauss rule on [0, 1], exact for degree 5.
const std::array<std::pair<double, double>, 3>& edge_rule();

struct P1Element {
    std::array<Point2, 3> x;
    double area;
    std::array<std::array<double, 2>, 3> grad;  ///< constant gradients of the hat functions

    Point2 point(const std::array<double, 3>& bary) const;
};

P1Element element_geometry(const StripMesh& mesh, int e);

struct DofMap {
    Domain domain = Domain::OmegaH;
    std::vector<int> p;  ///< per raw vertex: pressure dof or -1
    std::vector<int> u;  ///< per raw vertex: first displacement dof or -1 (second is +1)
    int n_p = 0;
    int n_u = 0;        ///< number of solid vertices
    std::vector<int> gamma_h;       ///< canonical vertices on Gamma_h, ordered by x1
    std::vector<double> gamma_h_x;  ///< their abscissae, plus the period as last entry

    int size() const { return n_p + 2 * n_u; }
    bool includes(Region r) const;
};

DofMap make_dofmap(const StripMesh& mesh, Domain domain);

/**
 * Real matrices on the full unknown vector (size DofMap::size()).
 * With T = [p; u]:
 *   K_f  int D grad p . grad q         (D = diag(sigma, 1/sigma))
 *   M_f  int sigma/c^2 p q
 *   C    int_Gamma q (n . u)           (pressure rows, displacement columns)
 *   K_s  int lambda div u div v + 2 mu eps(u) : eps(v)
 *   M_s  int u . v
 * and the unweighted pieces of the H1 norms.
 */
struct SpatialOperators {
    SparseReal Kf, Mf, C, Ks, Ms;
    SparseReal grad_p, mass_p;   ///< int grad p.grad q, int p q
    SparseReal grad_u, div_u;    ///< int grad u : grad v, int div u div v
};

SpatialOperators assemble_spatial(const StripMesh& mesh, const MediaParams& media, const DofMap& dofs);

/// Load vector int chi/c^2 q over the fluid elements below Gamma_h.
Eigen::VectorXd source_load_vector(const StripMesh& mesh, const MediaParams& media, const DofMap& dofs,
                                   const std::function<double(const Point2&)>& chi);

/// L2(Omega_h) norm of chi, quadrature on the fluid elements.
double source_l2_norm(const StripMesh& mesh, const std::function<double(const Point2&)>& chi);

/// Per-raw-vertex values of the pressure part of a dof vector (0 at Dirichlet vertices).
template <class Vec>
std::vector<typename Vec::Scalar> pressure_nodal(const DofMap& dofs, const Vec& x)
{
    std::vector<typename Vec::Scalar> out(dofs.p.size(), typename Vec::Scalar(0));
    for (std::size_t v = 0; v < dofs.p.size(); ++v)
        if (dofs.p[v] >= 0) out[v] = x[dofs.p[v]];
    return out;
}

/// Squared H1 norm (gradient part and L2 part) over the fluid elements of
/// the mesh, i.e. Omega_h minus the obstacle, of per-vertex nodal values.
template <class T>
std::pair<double, double> fluid_h1_parts(const StripMesh& mesh, const std::vector<T>& nodal)
{
    double g2 = 0.0, m2 = 0.0;
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        if (mesh.regions()[e] != Region::Fluid) continue;
        const auto el = element_geometry(mesh, static_cast<int>(e));
        const auto& t = mesh.triangles()[e];
        T gx(0), gz(0);
        std::array<T, 3> v{nodal[t[0]], nodal[t[1]], nodal[t[2]]};
        for (int k = 0; k < 3; ++k) {
            gx += v[k] * el.grad[k][0];
            gz += v[k] * el.grad[k][1];
        }
        g2 += el.area * (std::norm(gx) + std::norm(gz));
        // exact P1 mass: area/12 (sum |v|^2 + |sum v|^2)
        T sum = v[0] + v[1] + v[2];
        m2 += el.area / 12.0 * (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]) + std::norm(sum));
    }
    return {g2, m2};
}

/// Interpolates per-vertex values at a point; throws DomainError outside the mesh.
template <class T>
T interpolate(const StripMesh& mesh, const std::vector<T>& nodal, const Point2& x);

}  // namespace tdpml
