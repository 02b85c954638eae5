#pragma once

#include "vtfem/geom.hpp"

namespace vtfem {

/// Vector-valued function of space with an analytic gradient
/// (gradient[i][j] = d u_i / d x_j).  Used for Dirichlet data and
/// as the reference field in error norms.
template <int dim>
struct VectorFunction {
  virtual ~VectorFunction() = default;
  virtual Vec<dim> value(const Vec<dim> &p) const = 0;
  virtual Mat<dim> gradient(const Vec<dim> &p) const = 0;
};

/// u(x) = c (constant translation).
template <int dim>
struct ConstantFunction : VectorFunction<dim> {
  Vec<dim> c;
  explicit ConstantFunction(const Vec<dim> &v) : c(v) {}
  Vec<dim> value(const Vec<dim> &) const override { return c; }
  Mat<dim> gradient(const Vec<dim> &) const override { return {}; }
};

/// u(x) = A x + b.
template <int dim>
struct LinearFunction : VectorFunction<dim> {
  Mat<dim> A;
  Vec<dim> b;
  LinearFunction(const Mat<dim> &a, const Vec<dim> &v) : A(a), b(v) {}
  Vec<dim> value(const Vec<dim> &p) const override { return A * p + b; }
  Mat<dim> gradient(const Vec<dim> &) const override { return A; }
};

}  // namespace vtfem
