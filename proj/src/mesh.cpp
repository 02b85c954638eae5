#include "vtfem/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace vtfem {

namespace {

template <int dim>
double attractor_distance(const RefinementSpec<dim> &spec, const Vec<dim> &p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto &q : spec.attractor_points) d = std::min(d, distance(p, q));
  for (const auto &poly : spec.attractor_polylines)
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
      d = std::min(d, segment_distance(p, poly[i], poly[i + 1]));
  return d;
}

}  // namespace

template <int dim>
typename Mesh<dim>::Key Mesh<dim>::cell_key(int level, const std::array<std::int64_t, dim> &c) {
  Key k = Key(level);
  for (int a = dim - 1; a >= 0; --a) k = (k << 15) | Key(c[a]);
  return k;
}

template <int dim>
typename Mesh<dim>::Key Mesh<dim>::node_key(const std::array<std::int64_t, dim> &u) {
  Key k = 0;
  for (int a = dim - 1; a >= 0; --a) k = (k << 16) | Key(u[a]);
  return k;
}

template <int dim>
Box<dim> Mesh<dim>::cell_box(int c) const {
  const Cell &cell = cells_[c];
  const double inv = 1.0 / double(std::int64_t(1) << cell.level);
  Box<dim> b;
  for (int a = 0; a < dim; ++a) {
    b.extent[a] = box_.extent[a] * inv;
    b.origin[a] = box_.origin[a] + box_.extent[a] * (double(cell.coord[a]) * inv);
  }
  return b;
}

template <int dim>
Vec<dim> Mesh<dim>::cell_center(int c) const {
  Box<dim> b = cell_box(c);
  Vec<dim> r;
  for (int a = 0; a < dim; ++a) r[a] = b.origin[a] + 0.5 * b.extent[a];
  return r;
}

template <int dim>
Vec<dim> Mesh<dim>::cell_size(int c) const {
  return cell_box(c).extent;
}

template <int dim>
double Mesh<dim>::cell_volume(int c) const {
  return cell_box(c).volume();
}

template <int dim>
double Mesh<dim>::cell_diameter(int c) const {
  return norm(cell_box(c).extent);
}

template <int dim>
double Mesh<dim>::min_cell_side() const {
  double s = std::numeric_limits<double>::infinity();
  const double inv = 1.0 / double(std::int64_t(1) << max_level_);
  for (int a = 0; a < dim; ++a) s = std::min(s, box_.extent[a] * inv);
  return s;
}

template <int dim>
double Mesh<dim>::min_cell_diameter() const {
  const double inv = 1.0 / double(std::int64_t(1) << max_level_);
  Vec<dim> side;
  for (int a = 0; a < dim; ++a) side[a] = box_.extent[a] * inv;
  return norm(side);
}

template <int dim>
int Mesh<dim>::n_hanging_nodes() const {
  int n = 0;
  for (const auto &c : constraints_)
    if (!c.empty()) ++n;
  return n;
}

template <int dim>
int Mesh<dim>::locate_cell(const Vec<dim> &p) const {
  for (int a = 0; a < dim; ++a)
    if (p[a] < box_.origin[a] || p[a] > box_.origin[a] + box_.extent[a])
      throw std::domain_error("locate_cell: point outside the root box");

  std::array<double, dim> t;
  for (int a = 0; a < dim; ++a) {
    t[a] = (p[a] - box_.origin[a]) / box_.extent[a] * double(scale);
    t[a] = std::min(double(scale), std::max(0.0, t[a]));
  }

  int best = -1;
  for (int level = min_level_; level <= max_level_; ++level) {
    const double step = double(scale >> level);
    const std::int64_t ncell = std::int64_t(1) << level;
    std::array<std::array<std::int64_t, 2>, dim> cand;
    std::array<int, dim> ncand;
    for (int a = 0; a < dim; ++a) {
      const double u = t[a] / step;
      std::int64_t f = std::int64_t(std::floor(u));
      ncand[a] = 0;
      auto push = [&](std::int64_t v) {
        v = std::min(ncell - 1, std::max(std::int64_t(0), v));
        for (int i = 0; i < ncand[a]; ++i)
          if (cand[a][i] == v) return;
        cand[a][ncand[a]++] = v;
      };
      push(f);
      if (double(f) == u) push(f - 1);
    }
    std::array<int, dim> it{};
    while (true) {
      std::array<std::int64_t, dim> coord;
      for (int a = 0; a < dim; ++a) coord[a] = cand[a][it[a]];
      auto hit = leaf_map_.find(cell_key(level, coord));
      if (hit != leaf_map_.end() && (best < 0 || hit->second < best)) best = hit->second;
      int a = 0;
      for (; a < dim; ++a) {
        if (++it[a] < ncand[a]) break;
        it[a] = 0;
      }
      if (a == dim) break;
    }
  }
  if (best < 0) throw std::logic_error("locate_cell: no covering leaf found");
  return best;
}

template <int dim>
std::vector<int> Mesh<dim>::cells_in_ball(const Vec<dim> &center, double radius) const {
  if (radius < 0) throw std::invalid_argument("cells_in_ball: radius must be >= 0");
  Vec<dim> lo = center, hi = center;
  for (int a = 0; a < dim; ++a) {
    lo[a] -= radius;
    hi[a] += radius;
  }
  std::vector<int> out;
  // Descend the implicit tree; visit only subtrees whose closed box
  // intersects the closed query box.
  auto visit = [&](auto &&self, int level, std::array<std::int64_t, dim> coord) -> void {
    const double inv = 1.0 / double(std::int64_t(1) << level);
    for (int a = 0; a < dim; ++a) {
      const double clo = box_.origin[a] + box_.extent[a] * (double(coord[a]) * inv);
      const double chi = box_.origin[a] + box_.extent[a] * (double(coord[a] + 1) * inv);
      if (chi < lo[a] || clo > hi[a]) return;
    }
    auto leaf = leaf_map_.find(cell_key(level, coord));
    if (leaf != leaf_map_.end()) {
      out.push_back(leaf->second);
      return;
    }
    if (!internal_set_.count(cell_key(level, coord))) return;
    for (int b = 0; b < n_corners; ++b) {
      std::array<std::int64_t, dim> child;
      for (int a = 0; a < dim; ++a) child[a] = 2 * coord[a] + ((b >> a) & 1);
      self(self, level + 1, child);
    }
  };
  visit(visit, 0, std::array<std::int64_t, dim>{});
  std::sort(out.begin(), out.end());
  return out;
}

template <int dim>
const std::vector<std::pair<int, int>> &Mesh<dim>::boundary_facets(int face_id) const {
  if (face_id < 0 || face_id >= 2 * dim)
    throw std::invalid_argument("boundary_facets: unknown face id");
  return boundary_facets_[face_id];
}

template <int dim>
bool Mesh<dim>::node_on_face(int n, int face_id) const {
  if (face_id < 0 || face_id >= 2 * dim)
    throw std::invalid_argument("node_on_face: unknown face id");
  const int axis = face_id / 2;
  return node_units_[n][axis] == ((face_id % 2) ? scale : 0);
}

template <int dim>
std::vector<int> Mesh<dim>::facet_neighbors(int c, int facet) const {
  const Cell &cell = cells_[c];
  const int axis = facet / 2;
  const int side = facet % 2;
  const std::int64_t ncell = std::int64_t(1) << cell.level;
  std::array<std::int64_t, dim> nb = cell.coord;
  nb[axis] += side ? 1 : -1;
  std::vector<int> out;
  if (nb[axis] < 0 || nb[axis] >= ncell) return out;

  // Same level or coarser.
  for (int lv = cell.level; lv >= 0; --lv) {
    std::array<std::int64_t, dim> cc;
    for (int a = 0; a < dim; ++a) cc[a] = nb[a] >> (cell.level - lv);
    auto hit = leaf_map_.find(cell_key(lv, cc));
    if (hit != leaf_map_.end()) {
      out.push_back(hit->second);
      return out;
    }
  }
  // Finer: children of nb touching the shared facet.
  auto collect = [&](auto &&self, int level, std::array<std::int64_t, dim> coord) -> void {
    auto hit = leaf_map_.find(cell_key(level, coord));
    if (hit != leaf_map_.end()) {
      out.push_back(hit->second);
      return;
    }
    if (!internal_set_.count(cell_key(level, coord))) return;
    for (int b = 0; b < n_corners; ++b) {
      if (((b >> axis) & 1) != (side ? 0 : 1)) continue;  // stay on the shared facet
      std::array<std::int64_t, dim> child;
      for (int a = 0; a < dim; ++a) child[a] = 2 * coord[a] + ((b >> a) & 1);
      self(self, level + 1, child);
    }
  };
  collect(collect, cell.level, nb);
  std::sort(out.begin(), out.end());
  return out;
}

template <int dim>
void Mesh<dim>::enumerate_nodes() {
  std::vector<Key> keys;
  keys.reserve(cells_.size() * n_corners);
  for (const Cell &cell : cells_) {
    const std::int64_t step = scale >> cell.level;
    for (int b = 0; b < n_corners; ++b) {
      std::array<std::int64_t, dim> u;
      for (int a = 0; a < dim; ++a) u[a] = (cell.coord[a] + ((b >> a) & 1)) * step;
      keys.push_back(node_key(u));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  node_map_.clear();
  node_map_.reserve(keys.size());
  node_units_.resize(keys.size());
  node_pos_.resize(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    Key k = keys[i];
    std::array<std::int64_t, dim> u;
    for (int a = 0; a < dim; ++a) {
      u[a] = std::int64_t(k & 0xFFFF);
      k >>= 16;
    }
    node_units_[i] = u;
    for (int a = 0; a < dim; ++a)
      node_pos_[i][a] = box_.origin[a] + box_.extent[a] * (double(u[a]) / double(scale));
    node_map_.emplace(keys[i], int(i));
  }

  cell_nodes_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell &cell = cells_[c];
    const std::int64_t step = scale >> cell.level;
    for (int b = 0; b < n_corners; ++b) {
      std::array<std::int64_t, dim> u;
      for (int a = 0; a < dim; ++a) u[a] = (cell.coord[a] + ((b >> a) & 1)) * step;
      cell_nodes_[c][b] = node_map_.at(node_key(u));
    }
  }
}

template <int dim>
void Mesh<dim>::build_constraints() {
  constraints_.assign(node_pos_.size(), {});

  auto record = [&](int node, const Constraint &parents) {
    if (!constraints_[node].empty()) {
      if (constraints_[node] != parents)
        throw std::logic_error("mesh: conflicting hanging-node constraints");
      return;
    }
    constraints_[node] = parents;
  };

  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto &nodes = cell_nodes_[c];
    // Edge midpoints: corner pairs differing in exactly one bit.
    for (int b0 = 0; b0 < n_corners; ++b0)
      for (int a = 0; a < dim; ++a) {
        if ((b0 >> a) & 1) continue;
        const int b1 = b0 | (1 << a);
        std::array<std::int64_t, dim> mid;
        for (int ax = 0; ax < dim; ++ax)
          mid[ax] = (node_units_[nodes[b0]][ax] + node_units_[nodes[b1]][ax]) / 2;
        auto hit = node_map_.find(node_key(mid));
        if (hit != node_map_.end())
          record(hit->second, {{nodes[b0], 0.5}, {nodes[b1], 0.5}});
      }
    // Face centers (3D only).
    if constexpr (dim == 3) {
      for (int facet = 0; facet < 6; ++facet) {
        const int axis = facet / 2;
        const int side = facet % 2;
        std::array<std::int64_t, dim> mid{};
        Constraint parents;
        for (int b = 0; b < n_corners; ++b) {
          if (((b >> axis) & 1) != side) continue;
          parents.push_back({nodes[b], 0.25});
          for (int ax = 0; ax < dim; ++ax) mid[ax] += node_units_[nodes[b]][ax];
        }
        for (int ax = 0; ax < dim; ++ax) mid[ax] /= 4;
        auto hit = node_map_.find(node_key(mid));
        if (hit != node_map_.end()) record(hit->second, parents);
      }
    }
  }

  // Resolve constraint chains so every parent is unconstrained.
  for (int pass = 0; pass < 16; ++pass) {
    bool changed = false;
    for (auto &cons : constraints_) {
      bool needs = false;
      for (const auto &[p, w] : cons)
        if (!constraints_[p].empty()) needs = true;
      if (!needs) continue;
      changed = true;
      Constraint expanded;
      for (const auto &[p, w] : cons) {
        if (constraints_[p].empty()) {
          expanded.push_back({p, w});
        } else {
          for (const auto &[q, v] : constraints_[p]) expanded.push_back({q, w * v});
        }
      }
      std::sort(expanded.begin(), expanded.end());
      Constraint merged;
      for (const auto &e : expanded) {
        if (!merged.empty() && merged.back().first == e.first)
          merged.back().second += e.second;
        else
          merged.push_back(e);
      }
      cons = merged;
    }
    if (!changed) return;
  }
  throw std::logic_error("mesh: hanging-node constraint chain did not resolve");
}

template <int dim>
void Mesh<dim>::build_boundary_facets() {
  for (auto &v : boundary_facets_) v.clear();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell &cell = cells_[c];
    const std::int64_t ncell = std::int64_t(1) << cell.level;
    for (int a = 0; a < dim; ++a) {
      if (cell.coord[a] == 0) boundary_facets_[2 * a].push_back({int(c), 2 * a});
      if (cell.coord[a] == ncell - 1) boundary_facets_[2 * a + 1].push_back({int(c), 2 * a + 1});
    }
  }
}

template <int dim>
Mesh<dim> build_grid(const Box<dim> &box, const RefinementSpec<dim> &spec) {
  for (int a = 0; a < dim; ++a)
    if (!(box.extent[a] > 0))
      throw std::invalid_argument("build_grid: extent must be strictly positive");
  if (spec.base_level < 1) throw std::invalid_argument("build_grid: base_level must be >= 1");
  if (spec.local_levels < 0) throw std::invalid_argument("build_grid: local_levels must be >= 0");
  if (spec.base_level + spec.local_levels > RefinementSpec<dim>::max_total_level)
    throw std::invalid_argument(
        "build_grid: refinement level cap exceeded (base_level + local_levels > 14)");

  using Cell = typename Mesh<dim>::Cell;
  Mesh<dim> mesh;
  mesh.box_ = box;

  std::vector<Cell> cells;
  {
    const std::int64_t n = std::int64_t(1) << spec.base_level;
    std::array<std::int64_t, dim> c{};
    while (true) {
      cells.push_back({spec.base_level, c});
      int a = 0;
      for (; a < dim; ++a) {
        if (++c[a] < n) break;
        c[a] = 0;
      }
      if (a == dim) break;
    }
  }

  auto center_of = [&](const Cell &cell) {
    const double inv = 1.0 / double(std::int64_t(1) << cell.level);
    Vec<dim> p;
    for (int a = 0; a < dim; ++a)
      p[a] = box.origin[a] + box.extent[a] * ((double(cell.coord[a]) + 0.5) * inv);
    return p;
  };
  auto refine = [](std::vector<Cell> &list, const std::vector<char> &mark) {
    std::vector<Cell> next;
    next.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!mark[i]) {
        next.push_back(list[i]);
        continue;
      }
      for (int b = 0; b < Mesh<dim>::n_corners; ++b) {
        Cell child;
        child.level = list[i].level + 1;
        for (int a = 0; a < dim; ++a)
          child.coord[a] = 2 * list[i].coord[a] + ((b >> a) & 1);
        next.push_back(child);
      }
    }
    list.swap(next);
  };

  const bool has_attractor =
      !spec.attractor_points.empty() || !spec.attractor_polylines.empty();
  for (int round = 0; round < spec.local_levels && has_attractor; ++round) {
    std::vector<char> mark(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (attractor_distance(spec, center_of(cells[i])) <= spec.attractor_radius)
        mark[i] = 1;
    refine(cells, mark);
  }

  // Restore 2:1 balance: probe all same-level neighbors (diagonals included)
  // and refine any leaf that is two or more levels coarser.
  while (true) {
    std::unordered_map<typename Mesh<dim>::Key, int> leaf;
    leaf.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      leaf.emplace(Mesh<dim>::cell_key(cells[i].level, cells[i].coord), int(i));

    std::vector<char> mark(cells.size(), 0);
    for (const Cell &cell : cells) {
      const std::int64_t n = std::int64_t(1) << cell.level;
      std::array<int, dim> off;
      off.fill(-1);
      while (true) {
        bool self = true;
        std::array<std::int64_t, dim> nb;
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
          if (off[a] != 0) self = false;
          nb[a] = cell.coord[a] + off[a];
          if (nb[a] < 0 || nb[a] >= n) inside = false;
        }
        if (!self && inside) {
          for (int lv = cell.level; lv >= 0; --lv) {
            std::array<std::int64_t, dim> cc;
            for (int a = 0; a < dim; ++a) cc[a] = nb[a] >> (cell.level - lv);
            auto hit = leaf.find(Mesh<dim>::cell_key(lv, cc));
            if (hit != leaf.end()) {
              if (cell.level - lv >= 2) mark[hit->second] = 1;
              break;
            }
          }
        }
        int a = 0;
        for (; a < dim; ++a) {
          if (++off[a] <= 1) break;
          off[a] = -1;
        }
        if (a == dim) break;
      }
    }
    if (std::find(mark.begin(), mark.end(), 1) == mark.end()) break;
    refine(cells, mark);
  }

  std::sort(cells.begin(), cells.end(), [](const Cell &x, const Cell &y) {
    if (x.level != y.level) return x.level < y.level;
    return x.coord < y.coord;
  });

  mesh.cells_ = std::move(cells);
  mesh.min_level_ = mesh.cells_.front().level;
  mesh.max_level_ = mesh.cells_.back().level;
  mesh.leaf_map_.reserve(mesh.cells_.size());
  for (std::size_t i = 0; i < mesh.cells_.size(); ++i) {
    const Cell &cell = mesh.cells_[i];
    mesh.leaf_map_.emplace(Mesh<dim>::cell_key(cell.level, cell.coord), int(i));
    std::array<std::int64_t, dim> c = cell.coord;
    for (int lv = cell.level - 1; lv >= 0; --lv) {
      for (int a = 0; a < dim; ++a) c[a] >>= 1;
      if (!mesh.internal_set_.insert(Mesh<dim>::cell_key(lv, c)).second) break;
    }
  }

  mesh.enumerate_nodes();
  mesh.build_constraints();
  mesh.build_boundary_facets();
  return mesh;
}

template class Mesh<2>;
template class Mesh<3>;
template Mesh<2> build_grid<2>(const Box<2> &, const RefinementSpec<2> &);
template Mesh<3> build_grid<3>(const Box<3> &, const RefinementSpec<3> &);

}  // namespace vtfem
