#include <doctest.h>

#include <cmath>

#include "vtfem/mesh.hpp"
#include "vtfem/vesselgen.hpp"

using namespace vtfem;

namespace {

Box<2> unit_square() { return {{0, 0}, {1, 1}}; }
Box<3> unit_cube() { return {{0, 0, 0}, {1, 1, 1}}; }

/// Linear-scan locate oracle with the same closed-box / lowest-index rule.
template <int dim>
int locate_brute_force(const Mesh<dim> &mesh, const Vec<dim> &p) {
  for (int c = 0; c < mesh.n_cells(); ++c)
    if (mesh.cell_box(c).contains(p)) return c;
  return -1;
}

template <int dim>
std::vector<int> cells_in_ball_brute_force(const Mesh<dim> &mesh, const Vec<dim> &center,
                                           double radius) {
  std::vector<int> out;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Box<dim> b = mesh.cell_box(c);
    bool hit = true;
    for (int a = 0; a < dim; ++a)
      if (b.origin[a] + b.extent[a] < center[a] - radius || b.origin[a] > center[a] + radius)
        hit = false;
    if (hit) out.push_back(c);
  }
  return out;
}

template <int dim>
double total_volume(const Mesh<dim> &mesh) {
  double v = 0;
  for (int c = 0; c < mesh.n_cells(); ++c) v += mesh.cell_volume(c);
  return v;
}

template <int dim>
void check_two_to_one(const Mesh<dim> &mesh) {
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int f = 0; f < 2 * dim; ++f)
      for (int nb : mesh.facet_neighbors(c, f))
        CHECK(std::abs(mesh.cell(c).level - mesh.cell(nb).level) <= 1);
}

Mesh<2> refined_square() {
  RefinementSpec<2> spec;
  spec.base_level = 2;
  spec.local_levels = 2;
  spec.attractor_points = {{0.3, 0.7}};
  spec.attractor_radius = 0.2;
  return build_grid(unit_square(), spec);
}

}  // namespace

TEST_CASE("uniform 2D grid: base level 3 gives 64 cells of size 1/8") {
  RefinementSpec<2> spec;
  spec.base_level = 3;
  const Mesh<2> mesh = build_grid(unit_square(), spec);
  CHECK(mesh.n_cells() == 64);
  CHECK(mesh.min_cell_side() == doctest::Approx(1.0 / 8).epsilon(1e-15));
  CHECK(mesh.n_nodes() == 81);
  CHECK(mesh.n_hanging_nodes() == 0);
}

TEST_CASE("local refinement near an attractor point") {
  RefinementSpec<2> spec;
  spec.base_level = 2;
  spec.local_levels = 1;
  spec.attractor_points = {{0.5, 0.5}};
  spec.attractor_radius = 0.3;
  const Mesh<2> mesh = build_grid(unit_square(), spec);
  // Hand enumeration: the four center cells (centers at distance ~0.177)
  // are refined, the rest (distance >= ~0.395) are not: 12 + 16 = 28.
  CHECK(mesh.n_cells() == 28);
  CHECK(mesh.n_cells() > 16);
  CHECK(mesh.n_cells() < 64);
  const int c = mesh.locate_cell({0.51, 0.51});
  CHECK(mesh.cell_size(c)[0] == doctest::Approx(1.0 / 8).epsilon(1e-15));
  check_two_to_one(mesh);
}

TEST_CASE("uniform 3D grid: base level 2 gives 64 hexes and 125 vertices") {
  RefinementSpec<3> spec;
  spec.base_level = 2;
  const Mesh<3> mesh = build_grid(unit_cube(), spec);
  CHECK(mesh.n_cells() == 64);
  CHECK(mesh.n_nodes() == 125);
}

TEST_CASE("build_grid rejects bad input") {
  RefinementSpec<2> spec;
  spec.base_level = 10;
  spec.local_levels = 5;
  spec.attractor_points = {{0.5, 0.5}};
  spec.attractor_radius = 0.1;
  CHECK_THROWS_AS(build_grid(unit_square(), spec), std::invalid_argument);
  RefinementSpec<2> ok;
  CHECK_THROWS_AS(build_grid(Box<2>{{0, 0}, {1, 0}}, ok), std::invalid_argument);
  RefinementSpec<2> zero;
  zero.base_level = 0;
  CHECK_THROWS_AS(build_grid(unit_square(), zero), std::invalid_argument);
}

TEST_CASE("locate_cell: interior point and facet tie-break") {
  RefinementSpec<2> spec;
  spec.base_level = 1;
  const Mesh<2> mesh = build_grid(unit_square(), spec);
  const int c = mesh.locate_cell({0.51, 0.51});
  CHECK(mesh.cell_box(c).origin[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mesh.cell_box(c).origin[1] == doctest::Approx(0.5).epsilon(1e-15));
  // Point shared by all four cells resolves to the lowest index.
  CHECK(mesh.locate_cell({0.5, 0.5}) == 0);
  CHECK_THROWS_AS(mesh.locate_cell({1.5, 0.5}), std::domain_error);
}

TEST_CASE("locate_cell agrees with a linear scan on random points") {
  const Mesh<2> mesh = refined_square();
  RngStream rng(7, 0);
  for (int i = 0; i < 1000; ++i) {
    const Vec<2> p{rng.next_double(), rng.next_double()};
    CHECK(mesh.locate_cell(p) == locate_brute_force(mesh, p));
  }
}

TEST_CASE("cells_in_ball matches the brute-force box intersection") {
  const Mesh<2> mesh = refined_square();

  // radius 0 at a cell interior point
  const Vec<2> q{0.6251, 0.1251};
  const auto single = mesh.cells_in_ball(q, 0.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == mesh.locate_cell(q));

  // radius >= domain diameter covers everything
  CHECK(int(mesh.cells_in_ball({0.5, 0.5}, 2.0).size()) == mesh.n_cells());

  RngStream rng(13, 0);
  for (int i = 0; i < 200; ++i) {
    const Vec<2> c{rng.next_double(), rng.next_double()};
    const double r = 0.3 * rng.next_double();
    CHECK(mesh.cells_in_ball(c, r) == cells_in_ball_brute_force(mesh, c, r));
  }
  CHECK_THROWS_AS(mesh.cells_in_ball({0.5, 0.5}, -1.0), std::invalid_argument);
}

TEST_CASE("volume partition holds after refinement") {
  const Mesh<2> mesh = refined_square();
  CHECK(total_volume(mesh) == doctest::Approx(1.0).epsilon(1e-12));

  RefinementSpec<3> spec;
  spec.base_level = 2;
  spec.local_levels = 2;
  spec.attractor_polylines = {{{0.2, 0.2, 0.1}, {0.8, 0.7, 0.9}}};
  spec.attractor_radius = 0.15;
  const Mesh<3> mesh3 = build_grid(unit_cube(), spec);
  CHECK(total_volume(mesh3) == doctest::Approx(1.0).epsilon(1e-12));
  check_two_to_one(mesh3);
  CHECK(mesh3.max_level() == 4);
}

TEST_CASE("hanging nodes are recorded with geometrically consistent parents") {
  const Mesh<2> mesh2 = refined_square();
  CHECK(mesh2.n_hanging_nodes() > 0);
  int checked = 0;
  for (int n = 0; n < mesh2.n_nodes(); ++n) {
    if (!mesh2.node_is_hanging(n)) continue;
    Vec<2> p{};
    double wsum = 0;
    for (const auto &[q, w] : mesh2.node_constraint(n)) {
      CHECK(!mesh2.node_is_hanging(q));  // fully resolved
      p += w * mesh2.node(q);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(distance(p, mesh2.node(n)) < 1e-14);
    ++checked;
  }
  CHECK(checked == mesh2.n_hanging_nodes());

  RefinementSpec<3> spec;
  spec.base_level = 1;
  spec.local_levels = 1;
  spec.attractor_points = {{0.25, 0.25, 0.25}};
  spec.attractor_radius = 0.1;
  const Mesh<3> mesh3 = build_grid(unit_cube(), spec);
  CHECK(mesh3.n_hanging_nodes() > 0);
  for (int n = 0; n < mesh3.n_nodes(); ++n) {
    if (!mesh3.node_is_hanging(n)) continue;
    Vec<3> p{};
    for (const auto &[q, w] : mesh3.node_constraint(n)) p += w * mesh3.node(q);
    CHECK(distance(p, mesh3.node(n)) < 1e-14);
  }
}

TEST_CASE("boundary faces carry the fixed -x,+x,-y,+y order") {
  RefinementSpec<2> spec;
  spec.base_level = 2;
  const Mesh<2> mesh = build_grid(Box<2>{{-1, -1}, {2, 2}}, spec);
  for (int f = 0; f < 4; ++f) {
    const auto &facets = mesh.boundary_facets(f);
    CHECK(facets.size() == 4);
    for (const auto &[cell, facet] : facets) {
      CHECK(facet == f);
      const Box<2> b = mesh.cell_box(cell);
      const int axis = f / 2;
      const double plane = (f % 2) ? 1.0 : -1.0;
      const double coord = (f % 2) ? b.origin[axis] + b.extent[axis] : b.origin[axis];
      CHECK(coord == doctest::Approx(plane).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(mesh.boundary_facets(4), std::invalid_argument);
  // every boundary facet belongs to exactly one face id
  std::size_t total = 0;
  for (int f = 0; f < 4; ++f) total += mesh.boundary_facets(f).size();
  CHECK(total == 16);
}

TEST_CASE("node_on_face matches coordinates") {
  const Mesh<2> mesh = refined_square();
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    CHECK(mesh.node_on_face(n, 0) == (mesh.node(n)[0] == 0.0));
    CHECK(mesh.node_on_face(n, 1) == (mesh.node(n)[0] == 1.0));
    CHECK(mesh.node_on_face(n, 3) == (mesh.node(n)[1] == 1.0));
  }
}
