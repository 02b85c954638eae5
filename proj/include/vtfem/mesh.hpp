#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vtfem/geom.hpp"

namespace vtfem {

/// Refinement request for build_grid: uniform refinement to base_level,
/// then local_levels extra rounds applied to cells whose center lies
/// within attractor_radius of any attractor point or polyline.
template <int dim>
struct RefinementSpec {
  int base_level = 1;
  int local_levels = 0;
  std::vector<Vec<dim>> attractor_points;
  std::vector<std::vector<Vec<dim>>> attractor_polylines;
  double attractor_radius = 0.0;

  // Guard against runaway refinement.
  static constexpr int max_total_level = 14;
};

template <int dim>
class Mesh;

/// Build a mesh over the box: uniform refinement to spec.base_level, local
/// refinement rounds near the attractors, then 2:1 balance restoration.
/// Throws std::invalid_argument on non-positive extents or a level-cap breach.
template <int dim>
Mesh<dim> build_grid(const Box<dim> &box, const RefinementSpec<dim> &spec);

/// Structured quadtree (2D) / octree (3D) mesh over an axis-aligned box.
///
/// Cells are the tree leaves; neighbors differ by at most one refinement
/// level and every hanging node carries an interpolation constraint
/// (value = mean of the facet parents, resolved to unconstrained nodes).
/// Boundary faces are numbered (-x,+x,-y,+y,-z,+z) = 0..2*dim-1.
/// Immutable after build; safe to share read-only across threads.
template <int dim>
class Mesh {
 public:
  static constexpr int n_corners = 1 << dim;
  // Integer node coordinates live on a fixed dyadic lattice with
  // 2^scale_bits units per box extent; midpoints at the level cap stay integral.
  static constexpr int scale_bits = RefinementSpec<dim>::max_total_level + 1;
  static constexpr std::int64_t scale = std::int64_t(1) << scale_bits;

  struct Cell {
    int level;
    std::array<std::int64_t, dim> coord;  // cell index at its own level
  };

  /// Weighted parents of a hanging node (empty for unconstrained nodes).
  using Constraint = std::vector<std::pair<int, double>>;

  const Box<dim> &box() const { return box_; }
  int n_cells() const { return int(cells_.size()); }
  int n_nodes() const { return int(node_pos_.size()); }
  const Cell &cell(int c) const { return cells_[c]; }
  const std::array<int, n_corners> &cell_nodes(int c) const { return cell_nodes_[c]; }
  const Vec<dim> &node(int n) const { return node_pos_[n]; }
  const std::array<std::int64_t, dim> &node_units(int n) const { return node_units_[n]; }

  bool node_is_hanging(int n) const { return !constraints_[n].empty(); }
  const Constraint &node_constraint(int n) const { return constraints_[n]; }
  int n_hanging_nodes() const;

  Box<dim> cell_box(int c) const;
  Vec<dim> cell_center(int c) const;
  Vec<dim> cell_size(int c) const;
  double cell_volume(int c) const;
  double cell_diameter(int c) const;

  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }
  double min_cell_side() const;
  double min_cell_diameter() const;

  /// Leaf cell containing the point (closed box); facet ties resolve to the
  /// lowest cell index.  Throws if the point is outside the root box.
  int locate_cell(const Vec<dim> &p) const;

  /// All leaf cells whose closed box intersects the closed axis-aligned box
  /// of half-width radius around center.  Ascending cell indices.
  std::vector<int> cells_in_ball(const Vec<dim> &center, double radius) const;

  /// Boundary facets marked with the given face id, as (cell, facet) pairs;
  /// facet = 2*axis + side with the same numbering as face ids.
  const std::vector<std::pair<int, int>> &boundary_facets(int face_id) const;

  /// True if the node lies on the boundary face with the given id.
  bool node_on_face(int n, int face_id) const;

  /// Facet-neighbor leaves of a cell across the given facet (1 or 2^(dim-1)).
  std::vector<int> facet_neighbors(int c, int facet) const;

  friend Mesh<dim> build_grid<dim>(const Box<dim> &box, const RefinementSpec<dim> &spec);

 private:
  using Key = std::uint64_t;
  static Key cell_key(int level, const std::array<std::int64_t, dim> &coord);
  static Key node_key(const std::array<std::int64_t, dim> &units);

  void enumerate_nodes();
  void build_constraints();
  void build_boundary_facets();

  Box<dim> box_;
  std::vector<Cell> cells_;
  std::vector<std::array<int, n_corners>> cell_nodes_;
  std::vector<std::array<std::int64_t, dim>> node_units_;
  std::vector<Vec<dim>> node_pos_;
  std::vector<Constraint> constraints_;
  std::unordered_map<Key, int> leaf_map_;
  std::unordered_set<Key> internal_set_;
  std::unordered_map<Key, int> node_map_;
  std::array<std::vector<std::pair<int, int>>, 2 * dim> boundary_facets_;
  int min_level_ = 0;
  int max_level_ = 0;
};

extern template class Mesh<2>;
extern template class Mesh<3>;
extern template Mesh<2> build_grid<2>(const Box<2> &, const RefinementSpec<2> &);
extern template Mesh<3> build_grid<3>(const Box<3> &, const RefinementSpec<3> &);

}  // namespace vtfem
