#pragma once
/**
 * @file mesh.hpp
 * @brief Boundary-fitted periodic triangulation of the strip f < x3 < h + L.
 *
 * Vertices are laid out on a structured (x1, level) lattice. Below an
 * auxiliary height b (f+ < b < obstacle) the rows follow the surface, above
 * b they are horizontal, and every obstacle vertex coordinate, h and h + L
 * is a grid line. Vertices are numbered row by row from the bottom, so the
 * Omega_h part of two meshes that differ only in L is numbered identically.
 */

#include "tdpml/model.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace tdpml {

enum class Region { Fluid, Solid, Pml };

enum class Marker { GammaF, Gamma, GammaH, GammaHL };

const char* to_string(Marker m);
const char* to_string(Region r);

struct BoundaryEdge {
    int v0 = -1;
    int v1 = -1;
    Marker marker = Marker::GammaF;
    int element = -1;        ///< fluid-side (or only) adjacent element
    int other_element = -1;  ///< solid element for Gamma, PML element for GammaH
    Point2 normal{};         ///< Gamma: unit normal pointing out of the solid
};

class StripMesh {
public:
    StripMesh() = default;

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<Region>& regions() const { return regions_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }

    /// Canonical representative of each vertex under x1 -> x1 + period.
    const std::vector<int>& periodic_image() const { return image_; }

    const Geometry& geometry() const { return geometry_; }
    const PmlProfile& pml() const { return pml_; }
    double h() const { return geometry_.h; }

    /// Number of vertices with x3 <= h (they come first in the numbering).
    int omega_h_vertex_count() const { return n_omega_h_vertices_; }
    int columns() const { return nx_; }
    int rows() const { return ny_; }

    /// Locates the element containing p (periodically wrapped) and returns its
    /// barycentric coordinates; element = -1 if p lies outside the strip.
    struct Location {
        int element = -1;
        std::array<double, 3> bary{};
    };
    Location locate(Point2 p) const;

    std::size_t count(Region r) const;

    friend StripMesh build_mesh(const Geometry& geom, const PmlProfile& pml, double target_h);

private:
    std::vector<Point2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<Region> regions_;
    std::vector<BoundaryEdge> edges_;
    std::vector<int> image_;
    Geometry geometry_;
    PmlProfile pml_{1.0, 1, 1.0, 1.0};
    int n_omega_h_vertices_ = 0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> xs_;  // lattice abscissae
};

/**
 * @brief Triangulates Omega_h, the obstacle and the PML layer.
 *
 * Requires 0 < target_h < min(h - f+, L), an obstacle made of axis-aligned
 * edges whose lowest point lies above f+. Throws GeometryError otherwise.
 */
StripMesh build_mesh(const Geometry& geom, const PmlProfile& pml, double target_h);

/**
 * Writes the mesh in the plain-text exchange format:
 *
 *     tdpml-mesh 1
 *     vertices <n>
 *     <id> <x1> <x3> <periodic image>
 *     triangles <n>
 *     <id> <v0> <v1> <v2> <fluid|solid|pml>
 *     edges <n>
 *     <v0> <v1> <GammaF|Gamma|GammaH|GammaHL> <n1> <n3>
 */
void write_mesh(std::ostream& os, const StripMesh& mesh);

}  // namespace tdpml
