#include "tdpml/mesh.hpp"

#include "tdpml/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace tdpml {

const char* to_string(Marker m)
{
    switch (m) {
    case Marker::GammaF: return "GammaF";
    case Marker::Gamma: return "Gamma";
    case Marker::GammaH: return "GammaH";
    case Marker::GammaHL: return "GammaHL";
    }
    return "?";
}

const char* to_string(Region r)
{
    switch (r) {
    case Region::Fluid: return "fluid";
    case Region::Solid: return "solid";
    case Region::Pml: return "pml";
    }
    return "?";
}

namespace {

// Sorted breakpoints, each interval split into ceil(len / target) equal cells.
std::vector<double> subdivide(std::vector<double> breaks, double target)
{
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> uniq;
    for (double b : breaks) {
        if (uniq.empty() || b - uniq.back() > 1e-12 * std::max(1.0, std::abs(b))) uniq.push_back(b);
    }
    std::vector<double> out{uniq.front()};
    for (std::size_t k = 0; k + 1 < uniq.size(); ++k) {
        const double a = uniq[k], b = uniq[k + 1];
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / target - 1e-9)));
        for (int i = 1; i <= n; ++i) out.push_back(i == n ? b : a + (b - a) * i / n);
    }
    return out;
}

std::array<double, 3> barycentric(const Point2& p, const Point2& a, const Point2& b, const Point2& c)
{
    const double det = (b.x1 - a.x1) * (c.x3 - a.x3) - (c.x1 - a.x1) * (b.x3 - a.x3);
    const double l1 = ((p.x1 - a.x1) * (c.x3 - a.x3) - (c.x1 - a.x1) * (p.x3 - a.x3)) / det;
    const double l2 = ((b.x1 - a.x1) * (p.x3 - a.x3) - (p.x1 - a.x1) * (b.x3 - a.x3)) / det;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

StripMesh build_mesh(const Geometry& geom, const PmlProfile& pml, double target_h)
{
    const auto poly = validate_geometry(geom);
    const double fp = geom.f_plus(), fm = geom.f_minus(), h = geom.h;
    if (!(target_h > 0.0) || !(target_h < std::min(h - fp, pml.L())))
        throw GeometryError("mesh size must satisfy 0 < target_h < min(h - f+, L)");

    std::vector<double> xbreaks{0.0, geom.period};
    std::vector<double> zbreaks{h};
    double obstacle_bottom = h;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const double scale = std::max({1.0, std::abs(a.x1), std::abs(a.x3)});
        if (std::abs(a.x1 - b.x1) > 1e-12 * scale && std::abs(a.x3 - b.x3) > 1e-12 * scale)
            throw GeometryError("obstacle edges must be axis-aligned for the structured mesher");
        xbreaks.push_back(a.x1);
        zbreaks.push_back(a.x3);
        obstacle_bottom = std::min(obstacle_bottom, a.x3);
    }
    if (!(obstacle_bottom > fp)) throw GeometryError("obstacle must lie above the surface maximum f+");

    const double b = fp + 0.5 * (obstacle_bottom - fp);
    zbreaks.push_back(b);
    const auto xs = subdivide(xbreaks, target_h);
    auto upper = subdivide(zbreaks, target_h);
    const int n_layer = std::max(1, static_cast<int>(std::ceil(pml.L() / target_h - 1e-9)));
    for (int k = 1; k <= n_layer; ++k) upper.push_back(k == n_layer ? h + pml.L() : h + pml.L() * k / n_layer);
    const int nb = std::max(1, static_cast<int>(std::ceil((b - fm) / target_h - 1e-9)));

    StripMesh mesh;
    mesh.geometry_ = geom;
    mesh.geometry_.obstacle = poly;
    mesh.pml_ = pml;
    mesh.xs_ = xs;
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = nb + static_cast<int>(upper.size()) - 1;
    mesh.nx_ = nx;
    mesh.ny_ = ny;

    int row_h = -1;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const double x1 = xs[i];
            double x3;
            if (j <= nb) {
                const double f = geom.surface(x1);
                x3 = (j == nb) ? b : f + (b - f) * j / nb;
            } else {
                x3 = upper[j - nb];
            }
            mesh.vertices_.push_back({x1, x3});
            mesh.image_.push_back(i == nx ? j * (nx + 1) : j * (nx + 1) + i);
        }
        if (j > nb && std::abs(upper[j - nb] - h) < 1e-12 * std::max(1.0, std::abs(h))) row_h = j;
    }
    if (row_h < 0) throw GeometryError("internal: level h missing from the lattice");
    mesh.n_omega_h_vertices_ = (row_h + 1) * (nx + 1);

    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            std::array<std::array<int, 3>, 2> tris;
            if ((i + j) % 2 == 0)
                tris = {{{v00, v10, v11}, {v00, v11, v01}}};
            else
                tris = {{{v00, v10, v01}, {v10, v11, v01}}};
            for (const auto& t : tris) {
                const auto& A = mesh.vertices_[t[0]];
                const auto& B = mesh.vertices_[t[1]];
                const auto& C = mesh.vertices_[t[2]];
                const Point2 centroid{(A.x1 + B.x1 + C.x1) / 3.0, (A.x3 + B.x3 + C.x3) / 3.0};
                Region r = Region::Fluid;
                if (!poly.empty() && point_in_polygon(centroid, poly))
                    r = Region::Solid;
                else if (centroid.x3 > h)
                    r = Region::Pml;
                mesh.triangles_.push_back(t);
                mesh.regions_.push_back(r);
            }
        }
    }

    // Edge adjacency on raw (non-identified) vertex ids.
    std::map<std::pair<int, int>, std::vector<int>> adjacency;
    for (std::size_t e = 0; e < mesh.triangles_.size(); ++e) {
        const auto& t = mesh.triangles_[e];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], c = t[(k + 1) % 3];
            adjacency[{std::min(a, c), std::max(a, c)}].push_back(static_cast<int>(e));
        }
    }
    auto on_row = [nx](int v, int j) { return v / (nx + 1) == j; };
    for (const auto& [key, elems] : adjacency) {
        const auto [a, c] = key;
        BoundaryEdge edge;
        edge.v0 = a;
        edge.v1 = c;
        if (elems.size() == 1) {
            if (on_row(a, 0) && on_row(c, 0)) {
                edge.marker = Marker::GammaF;
            } else if (on_row(a, ny) && on_row(c, ny)) {
                edge.marker = Marker::GammaHL;
            } else {
                continue;  // lateral edge, identified periodically
            }
            edge.element = elems[0];
            mesh.edges_.push_back(edge);
            continue;
        }
        const Region r0 = mesh.regions_[elems[0]], r1 = mesh.regions_[elems[1]];
        if (r0 == r1) continue;
        auto pick = [&](Region want) { return mesh.regions_[elems[0]] == want ? elems[0] : elems[1]; };
        if ((r0 == Region::Solid) != (r1 == Region::Solid)) {
            if (r0 == Region::Pml || r1 == Region::Pml)
                throw GeometryError("obstacle touches the PML layer");
            edge.marker = Marker::Gamma;
            edge.element = pick(Region::Fluid);
            edge.other_element = pick(Region::Solid);
            const Point2 mid{0.5 * (mesh.vertices_[a].x1 + mesh.vertices_[c].x1),
                             0.5 * (mesh.vertices_[a].x3 + mesh.vertices_[c].x3)};
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < poly.size(); ++s) {
                const auto& p = poly[s];
                const auto& q = poly[(s + 1) % poly.size()];
                const double d = distance_to_polygon(mid, {p, q});
                if (d < best) {
                    best = d;
                    const double len = std::hypot(q.x1 - p.x1, q.x3 - p.x3);
                    edge.normal = {(q.x3 - p.x3) / len, -(q.x1 - p.x1) / len};
                }
            }
        } else {
            edge.marker = Marker::GammaH;
            edge.element = pick(Region::Fluid);
            edge.other_element = pick(Region::Pml);
        }
        mesh.edges_.push_back(edge);
    }
    return mesh;
}

std::size_t StripMesh::count(Region r) const
{
    return static_cast<std::size_t>(std::count(regions_.begin(), regions_.end(), r));
}

StripMesh::Location StripMesh::locate(Point2 p) const
{
    Location loc;
    const double period = geometry_.period;
    p.x1 -= period * std::floor(p.x1 / period);
    auto it = std::upper_bound(xs_.begin(), xs_.end(), p.x1);
    int col = static_cast<int>(it - xs_.begin()) - 1;
    col = std::clamp(col, 0, nx_ - 1);
    double best = -std::numeric_limits<double>::infinity();
    // Elements are created cell by cell: two per cell, rows of nx cells.
    for (int j = 0; j < ny_; ++j) {
        for (int k = 0; k < 2; ++k) {
            const int e = 2 * (j * nx_ + col) + k;
            const auto& t = triangles_[e];
            const auto bc = barycentric(p, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
            const double worst = std::min({bc[0], bc[1], bc[2]});
            if (worst > best) {
                best = worst;
                loc.element = e;
                loc.bary = bc;
            }
        }
    }
    if (best < -1e-9) loc.element = -1;
    return loc;
}

void write_mesh(std::ostream& os, const StripMesh& mesh)
{
    os.precision(17);
    os << "tdpml-mesh 1\n";
    os << "vertices " << mesh.vertices().size() << "\n";
    for (std::size_t i = 0; i < mesh.vertices().size(); ++i) {
        const auto& v = mesh.vertices()[i];
        os << i << ' ' << v.x1 << ' ' << v.x3 << ' ' << mesh.periodic_image()[i] << "\n";
    }
    os << "triangles " << mesh.triangles().size() << "\n";
    for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
        const auto& t = mesh.triangles()[e];
        os << e << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << to_string(mesh.regions()[e]) << "\n";
    }
    os << "edges " << mesh.boundary_edges().size() << "\n";
    for (const auto& edge : mesh.boundary_edges()) {
        os << edge.v0 << ' ' << edge.v1 << ' ' << to_string(edge.marker) << ' ' << edge.normal.x1 << ' '
           << edge.normal.x3 << "\n";
    }
}

}  // namespace tdpml
