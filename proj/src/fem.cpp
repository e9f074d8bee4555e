#include "tdpml/fem.hpp"

#include "tdpml/error.hpp"

#include <algorithm>
#include <cmath>

namespace tdpml {

const std::array<QuadPoint, 7>& triangle_rule()
{
    static const std::array<QuadPoint, 7> rule = [] {
        const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
        return std::array<QuadPoint, 7>{{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225},
                                         {{a1, b1, b1}, w1},
                                         {{b1, a1, b1}, w1},
                                         {{b1, b1, a1}, w1},
                                         {{a2, b2, b2}, w2},
                                         {{b2, a2, b2}, w2},
                                         {{b2, b2, a2}, w2}}};
    }();
    return rule;
}

const std::array<std::pair<double, double>, 3>& edge_rule()
{
    static const std::array<std::pair<double, double>, 3> rule{
        {{0.5 - std::sqrt(0.15), 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + std::sqrt(0.15), 5.0 / 18.0}}};
    return rule;
}

Point2 P1Element::point(const std::array<double, 3>& b) const
{
    return {b[0] * x[0].x1 + b[1] * x[1].x1 + b[2] * x[2].x1, b[0] * x[0].x3 + b[1] * x[1].x3 + b[2] * x[2].x3};
}

P1Element element_geometry(const StripMesh& mesh, int e)
{
    const auto& t = mesh.triangles()[e];
    P1Element el;
    for (int k = 0; k < 3; ++k) el.x[k] = mesh.vertices()[t[k]];
    const double det = (el.x[1].x1 - el.x[0].x1) * (el.x[2].x3 - el.x[0].x3) -
                       (el.x[2].x1 - el.x[0].x1) * (el.x[1].x3 - el.x[0].x3);
    el.area = 0.5 * det;
    for (int k = 0; k < 3; ++k) {
        const auto& b = el.x[(k + 1) % 3];
        const auto& c = el.x[(k + 2) % 3];
        el.grad[k] = {(b.x3 - c.x3) / det, (c.x1 - b.x1) / det};
    }
    return el;
}

bool DofMap::includes(Region r) const
{
    return r == Region::Fluid || (r == Region::Pml && domain == Domain::OmegaHL);
}

DofMap make_dofmap(const StripMesh& mesh, Domain domain)
{
    DofMap d;
    d.domain = domain;
    const std::size_t nv = mesh.vertices().size();
    const int nx = mesh.columns(), ny = mesh.rows();
    const auto& img = mesh.periodic_image();
    std::vector<char> fluid(nv, 0), solid(nv, 0);
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        const Region r = mesh.regions()[e];
        for (int v : mesh.triangles()[e]) {
            if (d.includes(r)) fluid[img[v]] = 1;
            if (r == Region::Solid) solid[img[v]] = 1;
        }
    }
    const int top_row = domain == Domain::OmegaHL ? ny : -1;
    d.p.assign(nv, -1);
    d.u.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        if (img[v] != static_cast<int>(v) || !fluid[v]) continue;
        const int row = static_cast<int>(v) / (nx + 1);
        if (row == 0 || row == top_row) continue;
        d.p[v] = d.n_p++;
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (img[v] != static_cast<int>(v) || !solid[v]) continue;
        d.u[v] = d.n_p + 2 * d.n_u++;
    }
    for (std::size_t v = 0; v < nv; ++v) {
        d.p[v] = d.p[img[v]];
        d.u[v] = d.u[img[v]];
    }

    const int row_h = mesh.omega_h_vertex_count() / (nx + 1) - 1;
    for (int i = 0; i < nx; ++i) {
        const int v = row_h * (nx + 1) + i;
        d.gamma_h.push_back(v);
        d.gamma_h_x.push_back(mesh.vertices()[v].x1);
    }
    d.gamma_h_x.push_back(mesh.geometry().period);
    return d;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseReal build(int n, const Triplets& t)
{
    SparseReal m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

SpatialOperators assemble_spatial(const StripMesh& mesh, const MediaParams& media, const DofMap& dofs)
{
    const int n = dofs.size();
    Triplets kf, mf, c, ks, ms, gp, mp, gu, du;
    const auto& rule = triangle_rule();
    const double h = mesh.h();
    const PmlProfile& pml = mesh.pml();

    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        const Region r = mesh.regions()[e];
        const auto el = element_geometry(mesh, static_cast<int>(e));
        const auto& t = mesh.triangles()[e];

        if (dofs.includes(r)) {
            // sigma-weighted integrals of products of hat functions
            double s_int = 0.0, inv_s_int = 0.0;
            std::array<std::array<double, 3>, 3> smass{};
            for (const auto& q : rule) {
                const double sig = r == Region::Pml ? sigma_profile(el.point(q.bary).x3, pml, h) : 1.0;
                s_int += q.weight * sig;
                inv_s_int += q.weight / sig;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) smass[a][b] += q.weight * sig * q.bary[a] * q.bary[b];
            }
            for (int a = 0; a < 3; ++a) {
                const int i = dofs.p[t[a]];
                if (i < 0) continue;
                for (int b = 0; b < 3; ++b) {
                    const int j = dofs.p[t[b]];
                    if (j < 0) continue;
                    const double gxx = el.grad[a][0] * el.grad[b][0], gzz = el.grad[a][1] * el.grad[b][1];
                    kf.emplace_back(i, j, el.area * (s_int * gxx + inv_s_int * gzz));
                    mf.emplace_back(i, j, el.area * smass[a][b] / (media.c * media.c));
                    gp.emplace_back(i, j, el.area * (gxx + gzz));
                    mp.emplace_back(i, j, el.area * (a == b ? 2.0 : 1.0) / 12.0);
                }
            }
        } else if (r == Region::Solid) {
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    const auto& ga = el.grad[a];
                    const auto& gb = el.grad[b];
                    const double dot = ga[0] * gb[0] + ga[1] * gb[1];
                    const double mass = el.area * (a == b ? 2.0 : 1.0) / 12.0;
                    for (int d = 0; d < 2; ++d) {
                        const int i = dofs.u[t[a]] + d;
                        for (int f = 0; f < 2; ++f) {
                            const int j = dofs.u[t[b]] + f;
                            const double kval = media.lambda * ga[d] * gb[f] +
                                                media.mu * ((d == f ? dot : 0.0) + ga[f] * gb[d]);
                            ks.emplace_back(i, j, el.area * kval);
                            du.emplace_back(i, j, el.area * ga[d] * gb[f]);
                            if (d == f) {
                                ms.emplace_back(i, j, mass);
                                gu.emplace_back(i, j, el.area * dot);
                            }
                        }
                    }
                }
            }
        }
    }

    for (const auto& edge : mesh.boundary_edges()) {
        if (edge.marker != Marker::Gamma) continue;
        const auto& a = mesh.vertices()[edge.v0];
        const auto& b = mesh.vertices()[edge.v1];
        const double len = std::hypot(b.x1 - a.x1, b.x3 - a.x3);
        const std::array<int, 2> vs{edge.v0, edge.v1};
        for (int x = 0; x < 2; ++x) {
            const int i = dofs.p[vs[x]];
            if (i < 0) continue;
            for (int y = 0; y < 2; ++y) {
                const double w = len * (x == y ? 2.0 : 1.0) / 6.0;
                c.emplace_back(i, dofs.u[vs[y]], w * edge.normal.x1);
                c.emplace_back(i, dofs.u[vs[y]] + 1, w * edge.normal.x3);
            }
        }
    }

    SpatialOperators ops;
    ops.Kf = build(n, kf);
    ops.Mf = build(n, mf);
    ops.C = build(n, c);
    ops.Ks = build(n, ks);
    ops.Ms = build(n, ms);
    ops.grad_p = build(n, gp);
    ops.mass_p = build(n, mp);
    ops.grad_u = build(n, gu);
    ops.div_u = build(n, du);
    return ops;
}

Eigen::VectorXd source_load_vector(const StripMesh& mesh, const MediaParams& media, const DofMap& dofs,
                                   const std::function<double(const Point2&)>& chi)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs.size());
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        if (mesh.regions()[e] != Region::Fluid) continue;
        const auto el = element_geometry(mesh, static_cast<int>(e));
        const auto& t = mesh.triangles()[e];
        for (const auto& q : triangle_rule()) {
            const double val = chi(el.point(q.bary));
            if (val == 0.0) continue;
            for (int a = 0; a < 3; ++a) {
                const int i = dofs.p[t[a]];
                if (i >= 0) b[i] += el.area * q.weight * val * q.bary[a] / (media.c * media.c);
            }
        }
    }
    return b;
}

double source_l2_norm(const StripMesh& mesh, const std::function<double(const Point2&)>& chi)
{
    double acc = 0.0;
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        if (mesh.regions()[e] != Region::Fluid) continue;
        const auto el = element_geometry(mesh, static_cast<int>(e));
        for (const auto& q : triangle_rule()) {
            const double v = chi(el.point(q.bary));
            acc += el.area * q.weight * v * v;
        }
    }
    return std::sqrt(acc);
}

template <class T>
T interpolate(const StripMesh& mesh, const std::vector<T>& nodal, const Point2& x)
{
    const auto loc = mesh.locate(x);
    if (loc.element < 0) throw DomainError("point lies outside the mesh");
    const auto& t = mesh.triangles()[loc.element];
    return loc.bary[0] * nodal[t[0]] + loc.bary[1] * nodal[t[1]] + loc.bary[2] * nodal[t[2]];
}

template double interpolate<double>(const StripMesh&, const std::vector<double>&, const Point2&);
template cplx interpolate<cplx>(const StripMesh&, const std::vector<cplx>&, const Point2&);

}  // namespace tdpml
