#pragma once

#include "vtfem/elasticity.hpp"
#include "vtfem/geom.hpp"
#include "vtfem/mesh.hpp"

namespace vtfem {

/// Q1 shape functions and physical gradients on an axis-aligned cell of the
/// given sizes, at local coordinates xi in [0,1]^dim.  Corner order matches
/// Mesh::cell_nodes (bit per axis).
template <int dim>
inline void q1_basis(const Vec<dim> &xi, const Vec<dim> &size, double *phi, Vec<dim> *grad) {
  constexpr int nc = 1 << dim;
  for (int c = 0; c < nc; ++c) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= ((c >> a) & 1) ? xi[a] : (1.0 - xi[a]);
    phi[c] = v;
    for (int a = 0; a < dim; ++a) {
      double g = ((c >> a) & 1) ? 1.0 : -1.0;
      for (int b = 0; b < dim; ++b) {
        if (b == a) continue;
        g *= ((c >> b) & 1) ? xi[b] : (1.0 - xi[b]);
      }
      grad[c][a] = g / size[a];
    }
  }
}

/// Tensor-product Gauss rule over [0,1]^dim; calls fn(xi, weight).
template <int dim, class F>
inline void tensor_quadrature(int order, F &&fn) {
  const GaussRule &rule = gauss_rule(order);
  const int nq = int(rule.points.size());
  std::array<int, dim> it{};
  while (true) {
    Vec<dim> xi;
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      xi[a] = rule.points[it[a]];
      w *= rule.weights[it[a]];
    }
    fn(xi, w);
    int a = 0;
    for (; a < dim; ++a) {
      if (++it[a] < nq) break;
      it[a] = 0;
    }
    if (a == dim) break;
  }
}

template <int dim>
inline Vec<dim> local_coords(const Box<dim> &b, const Vec<dim> &p) {
  Vec<dim> xi;
  for (int a = 0; a < dim; ++a) xi[a] = (p[a] - b.origin[a]) / b.extent[a];
  return xi;
}

template <int dim>
inline Vec<dim> field_value_in_cell(const Field<dim> &f, int cell, const Vec<dim> &xi) {
  constexpr int nc = 1 << dim;
  double phi[nc];
  Vec<dim> grad[nc];
  q1_basis<dim>(xi, f.mesh->cell_size(cell), phi, grad);
  const auto &nodes = f.mesh->cell_nodes(cell);
  Vec<dim> u;
  for (int c = 0; c < nc; ++c)
    for (int a = 0; a < dim; ++a) u[a] += phi[c] * f.coeffs[std::size_t(nodes[c]) * dim + a];
  return u;
}

template <int dim>
inline Mat<dim> field_gradient_in_cell(const Field<dim> &f, int cell, const Vec<dim> &xi) {
  constexpr int nc = 1 << dim;
  double phi[nc];
  Vec<dim> grad[nc];
  q1_basis<dim>(xi, f.mesh->cell_size(cell), phi, grad);
  const auto &nodes = f.mesh->cell_nodes(cell);
  Mat<dim> g;
  for (int c = 0; c < nc; ++c)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        g[a][b] += grad[c][b] * f.coeffs[std::size_t(nodes[c]) * dim + a];
  return g;
}

template <int dim>
inline Mat<dim> stress_from_gradient(const Mat<dim> &g, const Material &mat) {
  Mat<dim> s;
  const double div = trace(g);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) s[i][j] = mat.mu * (g[i][j] + g[j][i]);
    s[i][i] += mat.lambda * div;
  }
  return s;
}

}  // namespace vtfem
