#include "doctest.h"

#include "tdpml/error.hpp"
#include "tdpml/mesh.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace tdpml;

namespace {

double signed_area(const StripMesh& m, std::size_t e)
{
    const auto& t = m.triangles()[e];
    const auto& a = m.vertices()[t[0]];
    const auto& b = m.vertices()[t[1]];
    const auto& c = m.vertices()[t[2]];
    return 0.5 * ((b.x1 - a.x1) * (c.x3 - a.x3) - (c.x1 - a.x1) * (b.x3 - a.x3));
}

Geometry obstacle_geometry()
{
    Geometry g;
    g.surface = Surface::cosine(1.0, 0.1, 1);
    g.obstacle = {{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}};
    return g;
}

}  // namespace

TEST_CASE("flat strip without obstacle")
{
    Geometry g;
    const auto m = build_mesh(g, PmlProfile(1, 1, 0.5, 1), 0.25);
    CHECK(m.triangles().size() >= 2 * 4 * 6);
    std::set<Marker> seen;
    for (const auto& e : m.boundary_edges()) seen.insert(e.marker);
    CHECK(seen.count(Marker::GammaF) == 1);
    CHECK(seen.count(Marker::GammaH) == 1);
    CHECK(seen.count(Marker::GammaHL) == 1);
    CHECK(seen.count(Marker::Gamma) == 0);
    CHECK(m.count(Region::Solid) == 0);
    CHECK(m.count(Region::Pml) > 0);

    double area = 0;
    for (std::size_t e = 0; e < m.triangles().size(); ++e) {
        CHECK(signed_area(m, e) > 0);
        area += signed_area(m, e);
    }
    CHECK(area == doctest::Approx(1.5));
}

TEST_CASE("obstacle interface")
{
    const auto m = build_mesh(obstacle_geometry(), PmlProfile(1, 1, 0.5, 1), 0.05);
    CHECK(m.count(Region::Fluid) + m.count(Region::Solid) + m.count(Region::Pml) == m.triangles().size());

    double solid_area = 0;
    for (std::size_t e = 0; e < m.triangles().size(); ++e)
        if (m.regions()[e] == Region::Solid) solid_area += signed_area(m, e);
    CHECK(solid_area == doctest::Approx(0.04).epsilon(1e-12));

    double perimeter = 0;
    for (const auto& e : m.boundary_edges()) {
        if (e.marker != Marker::Gamma) continue;
        CHECK(m.regions()[e.element] == Region::Fluid);
        CHECK(m.regions()[e.other_element] == Region::Solid);
        const auto& a = m.vertices()[e.v0];
        const auto& b = m.vertices()[e.v1];
        perimeter += std::hypot(b.x1 - a.x1, b.x3 - a.x3);
        // normal points away from the obstacle centre
        const Point2 mid{0.5 * (a.x1 + b.x1), 0.5 * (a.x3 + b.x3)};
        CHECK((mid.x1 - 0.5) * e.normal.x1 + (mid.x3 - 0.5) * e.normal.x3 > 0);
        CHECK(std::hypot(e.normal.x1, e.normal.x3) == doctest::Approx(1.0));
    }
    CHECK(perimeter == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("every boundary edge carries one marker and the mesh is conforming")
{
    const auto m = build_mesh(obstacle_geometry(), PmlProfile(1, 1, 0.3, 1), 0.05);
    // Each interior edge (after periodic identification) is shared by exactly two triangles.
    std::map<std::pair<int, int>, int> count;
    const auto& img = m.periodic_image();
    for (const auto& t : m.triangles()) {
        for (int k = 0; k < 3; ++k) {
            int a = img[t[k]], b = img[t[(k + 1) % 3]];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    std::set<std::pair<int, int>> marked;
    for (const auto& e : m.boundary_edges()) {
        const auto key = std::make_pair(std::min(img[e.v0], img[e.v1]), std::max(img[e.v0], img[e.v1]));
        CHECK(marked.insert(key).second);
    }
    for (const auto& [key, c] : count) {
        CHECK(c <= 2);
        if (c == 1) CHECK(marked.count(key) == 1);
    }
}

TEST_CASE("periodic identification")
{
    const auto m = build_mesh(obstacle_geometry(), PmlProfile(1, 1, 0.5, 1), 0.05);
    const auto& v = m.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const int j = m.periodic_image()[i];
        if (j == static_cast<int>(i)) continue;
        CHECK(std::abs(v[i].x1 - v[j].x1 - 1.0) < 1e-12);
        CHECK(std::abs(v[i].x3 - v[j].x3) < 1e-12);
    }
}

TEST_CASE("mesh is boundary fitted to the surface")
{
    const auto g = obstacle_geometry();
    const auto m = build_mesh(g, PmlProfile(1, 1, 0.5, 1), 0.05);
    for (const auto& e : m.boundary_edges()) {
        if (e.marker != Marker::GammaF) continue;
        for (int v : {e.v0, e.v1}) CHECK(m.vertices()[v].x3 == doctest::Approx(g.surface(m.vertices()[v].x1)));
    }
}

TEST_CASE("omega_h numbering is shared across layer thicknesses")
{
    const auto g = obstacle_geometry();
    const auto a = build_mesh(g, PmlProfile(1, 1, 0.25, 1), 0.05);
    const auto b = build_mesh(g, PmlProfile(1, 1, 1.0, 1), 0.05);
    REQUIRE(a.omega_h_vertex_count() == b.omega_h_vertex_count());
    for (int i = 0; i < a.omega_h_vertex_count(); ++i) {
        CHECK(a.vertices()[i].x1 == b.vertices()[i].x1);
        CHECK(a.vertices()[i].x3 == b.vertices()[i].x3);
        CHECK(a.vertices()[i].x3 <= g.h + 1e-12);
    }
}

TEST_CASE("locate returns barycentric coordinates")
{
    const auto m = build_mesh(obstacle_geometry(), PmlProfile(1, 1, 0.5, 1), 0.05);
    for (Point2 p : {Point2{0.13, 0.7}, Point2{0.5, 0.5}, Point2{1.13, 0.7}, Point2{0.9, 1.3}}) {
        const auto loc = m.locate(p);
        REQUIRE(loc.element >= 0);
        const auto& t = m.triangles()[loc.element];
        double x = 0, z = 0;
        for (int k = 0; k < 3; ++k) {
            x += loc.bary[k] * m.vertices()[t[k]].x1;
            z += loc.bary[k] * m.vertices()[t[k]].x3;
        }
        CHECK(x == doctest::Approx(p.x1 - std::floor(p.x1)));
        CHECK(z == doctest::Approx(p.x3));
    }
    CHECK(m.locate({0.5, 2.0}).element == -1);
}

TEST_CASE("mesher rejects invalid input")
{
    Geometry g;
    g.h = 0.0;
    CHECK_THROWS_AS(build_mesh(g, PmlProfile(1, 1, 0.5, 1), 0.1), GeometryError);
    g = obstacle_geometry();
    CHECK_THROWS_AS(build_mesh(g, PmlProfile(1, 1, 0.5, 1), 0.6), GeometryError);
    g.obstacle = {{0.4, 0.4}, {0.6, 0.4}, {0.5, 0.6}};
    CHECK_THROWS_AS(build_mesh(g, PmlProfile(1, 1, 0.5, 1), 0.05), GeometryError);
}

TEST_CASE("mesh export format")
{
    Geometry g;
    const auto m = build_mesh(g, PmlProfile(1, 1, 0.5, 1), 0.25);
    std::ostringstream os;
    write_mesh(os, m);
    std::istringstream is(os.str());
    std::string tag;
    std::size_t n;
    is >> tag >> n;
    CHECK(tag == "tdpml-mesh");
    is >> tag >> n;
    CHECK(tag == "vertices");
    CHECK(n == m.vertices().size());
    CHECK(os.str().find("triangles " + std::to_string(m.triangles().size())) != std::string::npos);
    CHECK(os.str().find("GammaHL") != std::string::npos);
}
