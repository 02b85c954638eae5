#include "vtfem/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

#include "vtfem/fe.hpp"

namespace vtfem {

void Material::validate() const {
  if (!(mu > 0)) throw std::invalid_argument("Material: mu must be > 0");
  if (!(lambda >= 0)) throw std::invalid_argument("Material: lambda must be >= 0");
}

void CsrMatrix::multiply(const std::vector<double> &x, std::vector<double> &y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

double CsrMatrix::max_abs() const {
  double m = 0;
  for (double v : vals) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::max_asymmetry() const {
  double m = 0;
  for (int i = 0; i < n; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int j = cols[k];
      // find (j, i)
      double vji = 0;
      const int lo = row_ptr[j], hi = row_ptr[j + 1];
      auto it = std::lower_bound(cols.begin() + lo, cols.begin() + hi, i);
      if (it != cols.begin() + hi && *it == i) vji = vals[it - cols.begin()];
      m = std::max(m, std::abs(vals[k] - vji));
    }
  return m;
}

namespace {

/// Targets of a node under hanging-node condensation: itself if
/// unconstrained, otherwise its (real) parents with weights.
template <int dim>
void node_targets(const Mesh<dim> &mesh, int node,
                  std::vector<std::pair<int, double>> &out) {
  out.clear();
  if (!mesh.node_is_hanging(node)) {
    out.push_back({node, 1.0});
    return;
  }
  for (const auto &[p, w] : mesh.node_constraint(node)) out.push_back({p, w});
}

}  // namespace

template <int dim>
std::vector<double> element_stiffness(const Vec<dim> &sizes, const Material &mat,
                                      int quad_order) {
  constexpr int nc = 1 << dim;
  const int ndof = nc * dim;
  std::vector<double> ke(std::size_t(ndof) * ndof, 0.0);
  double detj = 1.0;
  for (int a = 0; a < dim; ++a) detj *= sizes[a];

  tensor_quadrature<dim>(quad_order, [&](const Vec<dim> &xi, double w) {
    double phi[nc];
    Vec<dim> grad[nc];
    q1_basis<dim>(xi, sizes, phi, grad);
    const double jw = w * detj;
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) {
        const double gg = dot(grad[i], grad[j]);
        for (int alpha = 0; alpha < dim; ++alpha)
          for (int beta = 0; beta < dim; ++beta) {
            double v = mat.mu * grad[i][beta] * grad[j][alpha] +
                       mat.lambda * grad[i][alpha] * grad[j][beta];
            if (alpha == beta) v += mat.mu * gg;
            ke[std::size_t(i * dim + alpha) * ndof + (j * dim + beta)] += jw * v;
          }
      }
  });
  return ke;
}

template <int dim>
SparseSystem<dim> assemble_stiffness(const Mesh<dim> &mesh, const Material &mat) {
  mat.validate();
  constexpr int nc = 1 << dim;

  SparseSystem<dim> sys;
  sys.mesh_ = &mesh;
  sys.mat_ = mat;

  const int n_nodes = mesh.n_nodes();
  // Rank real (unconstrained) nodes; hanging dofs are condensed away.
  std::vector<int> node_rank(n_nodes, -1);
  int n_real = 0;
  for (int n = 0; n < n_nodes; ++n)
    if (!mesh.node_is_hanging(n)) node_rank[n] = n_real++;

  sys.index_.assign(std::size_t(n_nodes) * dim, SparseSystem<dim>::kHanging);
  sys.dirichlet_.assign(std::size_t(n_nodes) * dim, 0.0);
  for (int n = 0; n < n_nodes; ++n)
    if (node_rank[n] >= 0)
      for (int a = 0; a < dim; ++a) sys.index_[std::size_t(n) * dim + a] = node_rank[n] * dim + a;

  // Node-level sparsity with constraint expansion.
  std::vector<std::pair<int, double>> ti, tj;
  std::vector<std::int64_t> pairs;
  pairs.reserve(std::size_t(mesh.n_cells()) * nc * nc);
  std::vector<int> support;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    support.clear();
    for (int b = 0; b < nc; ++b) {
      node_targets(mesh, mesh.cell_nodes(c)[b], ti);
      for (const auto &[node, w] : ti) support.push_back(node_rank[node]);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    for (int u : support)
      for (int v : support) pairs.push_back(std::int64_t(u) * n_real + v);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  CsrMatrix &K = sys.K_;
  K.n = n_real * dim;
  K.row_ptr.assign(K.n + 1, 0);
  for (std::int64_t pr : pairs) {
    const int u = int(pr / n_real);
    for (int a = 0; a < dim; ++a) K.row_ptr[u * dim + a + 1] += dim;
  }
  for (int i = 0; i < K.n; ++i) K.row_ptr[i + 1] += K.row_ptr[i];
  K.cols.assign(K.row_ptr.back(), 0);
  K.vals.assign(K.row_ptr.back(), 0.0);
  {
    std::vector<int> fill(K.n, 0);
    for (std::int64_t pr : pairs) {
      const int u = int(pr / n_real);
      const int v = int(pr % n_real);
      for (int a = 0; a < dim; ++a) {
        const int row = u * dim + a;
        for (int b = 0; b < dim; ++b) K.cols[K.row_ptr[row] + fill[row] + b] = v * dim + b;
        fill[row] += dim;
      }
    }
  }

  auto add_entry = [&K](int row, int col, double v) {
    const int lo = K.row_ptr[row], hi = K.row_ptr[row + 1];
    auto it = std::lower_bound(K.cols.begin() + lo, K.cols.begin() + hi, col);
    K.vals[it - K.cols.begin()] += v;
  };

  // Element matrices depend only on the refinement level; cache per level.
  std::map<int, std::vector<double>> ke_cache;
  const int ndof = nc * dim;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const int level = mesh.cell(c).level;
    auto cached = ke_cache.find(level);
    if (cached == ke_cache.end())
      cached = ke_cache.emplace(level, element_stiffness<dim>(mesh.cell_size(c), mat)).first;
    const std::vector<double> &ke = cached->second;
    const auto &nodes = mesh.cell_nodes(c);
    for (int i = 0; i < nc; ++i) {
      node_targets(mesh, nodes[i], ti);
      for (int j = 0; j < nc; ++j) {
        node_targets(mesh, nodes[j], tj);
        for (int alpha = 0; alpha < dim; ++alpha)
          for (int beta = 0; beta < dim; ++beta) {
            const double v = ke[std::size_t(i * dim + alpha) * ndof + (j * dim + beta)];
            for (const auto &[ni, wi] : ti)
              for (const auto &[nj, wj] : tj)
                add_entry(node_rank[ni] * dim + alpha, node_rank[nj] * dim + beta, wi * wj * v);
          }
      }
    }
  }

  sys.rhs_.assign(K.n, 0.0);
  return sys;
}

template <int dim>
void SparseSystem<dim>::add_rhs(int node, int comp, double value) {
  accumulate(rhs_, node, comp, value);
}

template <int dim>
void SparseSystem<dim>::accumulate(std::vector<double> &buf, int node, int comp,
                                   double value) const {
  if (!mesh_->node_is_hanging(node)) {
    const int idx = index_[std::size_t(node) * dim + comp];
    if (idx >= 0) buf[idx] += value;
    return;
  }
  for (const auto &[p, w] : mesh_->node_constraint(node)) {
    const int idx = index_[std::size_t(p) * dim + comp];
    if (idx >= 0) buf[idx] += w * value;
  }
}

template <int dim>
void SparseSystem<dim>::merge_rhs(const std::vector<double> &buf) {
  if (int(buf.size()) != K_.n)
    throw std::invalid_argument("merge_rhs: buffer size does not match active dofs");
  for (int i = 0; i < K_.n; ++i) rhs_[i] += buf[i];
}

template <int dim>
void apply_bc(SparseSystem<dim> &sys, const BoundarySpec<dim> &bc) {
  if (sys.bc_applied_) throw std::logic_error("apply_bc: boundary conditions already applied");
  const Mesh<dim> &mesh = *sys.mesh_;
  const int n_nodes = mesh.n_nodes();

  std::vector<char> is_dirichlet(sys.K_.n, 0);
  std::vector<double> g(sys.K_.n, 0.0);
  bool any = false;
  for (int face = 0; face < 2 * dim; ++face) {
    const auto &f = bc.faces[face];
    if (f.kind == BcKind::TractionFree) continue;
    if (f.kind == BcKind::DirichletField && f.field == nullptr)
      throw std::invalid_argument("apply_bc: DirichletField without a field");
    for (int n = 0; n < n_nodes; ++n) {
      if (!mesh.node_on_face(n, face) || mesh.node_is_hanging(n)) continue;
      Vec<dim> val{};
      if (f.kind == BcKind::DirichletField) val = f.field->value(mesh.node(n));
      for (int a = 0; a < dim; ++a) {
        const int idx = sys.index_[std::size_t(n) * dim + a];
        is_dirichlet[idx] = 1;
        g[idx] = val[a];
        sys.dirichlet_[std::size_t(n) * dim + a] = val[a];
        any = true;
      }
    }
  }
  if (!any && !bc.allow_pure_neumann)
    throw std::runtime_error("apply_bc: singular system (pure Neumann without opt-in)");

  // Renumber the free dofs and rebuild the reduced matrix; move K_fc * g to
  // the right-hand side.
  const CsrMatrix &K = sys.K_;
  std::vector<int> renum(K.n, -1);
  int n_free = 0;
  for (int i = 0; i < K.n; ++i)
    if (!is_dirichlet[i]) renum[i] = n_free++;

  CsrMatrix R;
  R.n = n_free;
  R.row_ptr.assign(n_free + 1, 0);
  std::vector<double> new_rhs(n_free, 0.0);
  for (int i = 0; i < K.n; ++i) {
    if (is_dirichlet[i]) continue;
    const int ri = renum[i];
    new_rhs[ri] = sys.rhs_[i];
    for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k) {
      if (is_dirichlet[K.cols[k]])
        new_rhs[ri] -= K.vals[k] * g[K.cols[k]];
      else
        ++R.row_ptr[ri + 1];
    }
  }
  for (int i = 0; i < n_free; ++i) R.row_ptr[i + 1] += R.row_ptr[i];
  R.cols.resize(R.row_ptr.back());
  R.vals.resize(R.row_ptr.back());
  for (int i = 0, fill = 0; i < K.n; ++i) {
    if (is_dirichlet[i]) continue;
    for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k) {
      if (is_dirichlet[K.cols[k]]) continue;
      R.cols[fill] = renum[K.cols[k]];
      R.vals[fill] = K.vals[k];
      ++fill;
    }
  }

  for (int n = 0; n < n_nodes; ++n)
    for (int a = 0; a < dim; ++a) {
      int &idx = sys.index_[std::size_t(n) * dim + a];
      if (idx < 0) continue;
      idx = is_dirichlet[idx] ? SparseSystem<dim>::kDirichlet : renum[idx];
    }
  sys.K_ = std::move(R);
  sys.rhs_ = std::move(new_rhs);
  sys.bc_applied_ = true;
}

std::vector<double> cg_solve(const CsrMatrix &K, const std::vector<double> &b, double tol,
                             long max_iter) {
  const int n = K.n;
  if (max_iter < 0) max_iter = 10L * std::max(1, n);
  std::vector<double> x(n, 0.0);
  const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (n == 0 || bnorm == 0) return x;

  std::vector<double> inv_diag(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k)
      if (K.cols[k] == i) inv_diag[i] = 1.0 / K.vals[k];

  std::vector<double> r = b, z(n), p(n), q(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
  double res = bnorm;
  for (long it = 0; it < max_iter; ++it) {
    K.multiply(p, q);
    const double pq = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * q[i];
    res = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    if (res <= tol * bnorm) return x;
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    const double beta = rz_new / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "cg_solve: no convergence within %ld iterations (relative residual %.3e)",
                max_iter, res / bnorm);
  throw std::runtime_error(msg);
}

template <int dim>
Field<dim> solve(const SparseSystem<dim> &sys, double tol, long max_iter) {
  if (!sys.bc_applied_)
    throw std::logic_error("solve: apply_bc must run before solve");
  const std::vector<double> x = cg_solve(sys.K_, sys.rhs_, tol, max_iter);

  // Expand to the full coefficient vector: free, Dirichlet, then hanging.
  const Mesh<dim> &mesh = *sys.mesh_;
  Field<dim> f;
  f.mesh = &mesh;
  f.coeffs.assign(std::size_t(mesh.n_nodes()) * dim, 0.0);
  for (int node = 0; node < mesh.n_nodes(); ++node)
    for (int a = 0; a < dim; ++a) {
      const std::size_t d = std::size_t(node) * dim + a;
      if (sys.index_[d] >= 0)
        f.coeffs[d] = x[sys.index_[d]];
      else if (sys.index_[d] == SparseSystem<dim>::kDirichlet)
        f.coeffs[d] = sys.dirichlet_[d];
    }
  for (int node = 0; node < mesh.n_nodes(); ++node) {
    if (!mesh.node_is_hanging(node)) continue;
    for (int a = 0; a < dim; ++a) {
      double v = 0;
      for (const auto &[p, w] : mesh.node_constraint(node))
        v += w * f.coeffs[std::size_t(p) * dim + a];
      f.coeffs[std::size_t(node) * dim + a] = v;
    }
  }
  return f;
}

template <int dim>
Vec<dim> evaluate(const Field<dim> &field, const Vec<dim> &p) {
  const int cell = field.mesh->locate_cell(p);
  return field_value_in_cell(field, cell, local_coords(field.mesh->cell_box(cell), p));
}

template <int dim>
Mat<dim> evaluate_gradient(const Field<dim> &field, const Vec<dim> &p) {
  const int cell = field.mesh->locate_cell(p);
  return field_gradient_in_cell(field, cell, local_coords(field.mesh->cell_box(cell), p));
}

template <int dim>
Mat<dim> evaluate_stress(const Field<dim> &field, const Material &mat, const Vec<dim> &p) {
  return stress_from_gradient(evaluate_gradient(field, p), mat);
}

namespace {

/// Quadrature over a boundary facet of a cell; fn(xi, weight * facet_area).
template <int dim, class F>
void facet_quadrature(const Mesh<dim> &mesh, int cell, int facet, int order, F &&fn) {
  const int axis = facet / 2;
  const int side = facet % 2;
  const Vec<dim> size = mesh.cell_size(cell);
  double area = 1.0;
  for (int a = 0; a < dim; ++a)
    if (a != axis) area *= size[a];
  const GaussRule &rule = gauss_rule(order);
  const int nq = int(rule.points.size());
  std::array<int, dim - 1> it{};
  while (true) {
    Vec<dim> xi;
    double w = 1.0;
    int k = 0;
    for (int a = 0; a < dim; ++a) {
      if (a == axis) {
        xi[a] = side ? 1.0 : 0.0;
        continue;
      }
      xi[a] = rule.points[it[k]];
      w *= rule.weights[it[k]];
      ++k;
    }
    fn(xi, w * area);
    int a = 0;
    for (; a < dim - 1; ++a) {
      if (++it[a] < nq) break;
      it[a] = 0;
    }
    if (a == dim - 1) break;
  }
}

}  // namespace

template <int dim>
Vec<dim> face_force(const Field<dim> &field, const Material &mat, int face_id) {
  const Mesh<dim> &mesh = *field.mesh;
  const int axis = face_id / 2;
  Vec<dim> normal{};
  normal[axis] = (face_id % 2) ? 1.0 : -1.0;
  Vec<dim> force{};
  for (const auto &[cell, facet] : mesh.boundary_facets(face_id)) {
    facet_quadrature(mesh, cell, facet, 2, [&](const Vec<dim> &xi, double w) {
      const Mat<dim> sigma =
          stress_from_gradient(field_gradient_in_cell(field, cell, xi), mat);
      force += w * (sigma * normal);
    });
  }
  return force;
}

template <int dim>
Vec<dim> face_average_displacement(const Field<dim> &field, int face_id) {
  const Mesh<dim> &mesh = *field.mesh;
  Vec<dim> sum{};
  double area = 0;
  for (const auto &[cell, facet] : mesh.boundary_facets(face_id)) {
    facet_quadrature(mesh, cell, facet, 2, [&](const Vec<dim> &xi, double w) {
      sum += w * field_value_in_cell(field, cell, xi);
      area += w;
    });
  }
  return (1.0 / area) * sum;
}

template <int dim>
ErrorNorms error_norms(const Field<dim> &field, const VectorFunction<dim> &exact,
                       double mask_radius, const std::vector<Vec<dim>> &centers) {
  const Mesh<dim> &mesh = *field.mesh;
  double l2 = 0, h1 = 0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (mask_radius > 0) {
      const Vec<dim> center = mesh.cell_center(c);
      bool masked = false;
      for (const auto &v : centers)
        if (distance(center, v) <= mask_radius) masked = true;
      if (masked) continue;
    }
    const Box<dim> b = mesh.cell_box(c);
    const double vol = b.volume();
    tensor_quadrature<dim>(3, [&](const Vec<dim> &xi, double w) {
      Vec<dim> p;
      for (int a = 0; a < dim; ++a) p[a] = b.origin[a] + b.extent[a] * xi[a];
      const Vec<dim> du = exact.value(p) - field_value_in_cell(field, c, xi);
      l2 += w * vol * dot(du, du);
      const Mat<dim> dg = exact.gradient(p) + (-1.0) * field_gradient_in_cell(field, c, xi);
      double fro = 0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) fro += dg[i][j] * dg[i][j];
      h1 += w * vol * fro;
    });
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

template <int dim>
Field<dim> interpolate(const Mesh<dim> &mesh, const VectorFunction<dim> &f) {
  Field<dim> out;
  out.mesh = &mesh;
  out.coeffs.assign(std::size_t(mesh.n_nodes()) * dim, 0.0);
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (mesh.node_is_hanging(n)) continue;
    const Vec<dim> v = f.value(mesh.node(n));
    for (int a = 0; a < dim; ++a) out.coeffs[std::size_t(n) * dim + a] = v[a];
  }
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (!mesh.node_is_hanging(n)) continue;
    for (int a = 0; a < dim; ++a) {
      double v = 0;
      for (const auto &[p, w] : mesh.node_constraint(n))
        v += w * out.coeffs[std::size_t(p) * dim + a];
      out.coeffs[std::size_t(n) * dim + a] = v;
    }
  }
  return out;
}

template class SparseSystem<2>;
template class SparseSystem<3>;
template std::vector<double> element_stiffness<2>(const Vec<2> &, const Material &, int);
template std::vector<double> element_stiffness<3>(const Vec<3> &, const Material &, int);
template SparseSystem<2> assemble_stiffness<2>(const Mesh<2> &, const Material &);
template SparseSystem<3> assemble_stiffness<3>(const Mesh<3> &, const Material &);
template void apply_bc<2>(SparseSystem<2> &, const BoundarySpec<2> &);
template void apply_bc<3>(SparseSystem<3> &, const BoundarySpec<3> &);
template Field<2> solve<2>(const SparseSystem<2> &, double, long);
template Field<3> solve<3>(const SparseSystem<3> &, double, long);
template Vec<2> evaluate<2>(const Field<2> &, const Vec<2> &);
template Vec<3> evaluate<3>(const Field<3> &, const Vec<3> &);
template Mat<2> evaluate_gradient<2>(const Field<2> &, const Vec<2> &);
template Mat<3> evaluate_gradient<3>(const Field<3> &, const Vec<3> &);
template Mat<2> evaluate_stress<2>(const Field<2> &, const Material &, const Vec<2> &);
template Mat<3> evaluate_stress<3>(const Field<3> &, const Material &, const Vec<3> &);
template Vec<2> face_force<2>(const Field<2> &, const Material &, int);
template Vec<3> face_force<3>(const Field<3> &, const Material &, int);
template Vec<2> face_average_displacement<2>(const Field<2> &, int);
template Vec<3> face_average_displacement<3>(const Field<3> &, int);
template ErrorNorms error_norms<2>(const Field<2> &, const VectorFunction<2> &, double,
                                   const std::vector<Vec<2>> &);
template ErrorNorms error_norms<3>(const Field<3> &, const VectorFunction<3> &, double,
                                   const std::vector<Vec<3>> &);
template Field<2> interpolate<2>(const Mesh<2> &, const VectorFunction<2> &);
template Field<3> interpolate<3>(const Mesh<3> &, const VectorFunction<3> &);

}  // namespace vtfem
