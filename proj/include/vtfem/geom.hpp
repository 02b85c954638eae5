#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace vtfem {

/// Small fixed-size vector used for points, displacements and tangents.
template <int dim>
struct Vec {
  double c[dim] = {};

  double &operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }

  Vec &operator+=(const Vec &o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec &operator-=(const Vec &o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec &operator*=(double s) {
    for (int i = 0; i < dim; ++i) c[i] *= s;
    return *this;
  }
};

template <int dim>
inline Vec<dim> operator+(Vec<dim> a, const Vec<dim> &b) { return a += b; }
template <int dim>
inline Vec<dim> operator-(Vec<dim> a, const Vec<dim> &b) { return a -= b; }
template <int dim>
inline Vec<dim> operator*(double s, Vec<dim> a) { return a *= s; }
template <int dim>
inline Vec<dim> operator*(Vec<dim> a, double s) { return a *= s; }

template <int dim>
inline double dot(const Vec<dim> &a, const Vec<dim> &b) {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += a.c[i] * b.c[i];
  return s;
}

template <int dim>
inline double norm(const Vec<dim> &a) { return std::sqrt(dot(a, a)); }

template <int dim>
inline double distance(const Vec<dim> &a, const Vec<dim> &b) { return norm(a - b); }

/// Small dense matrix (gradients, stresses, direction tensors).
template <int dim>
struct Mat {
  double m[dim][dim] = {};

  double *operator[](int i) { return m[i]; }
  const double *operator[](int i) const { return m[i]; }

  static Mat identity() {
    Mat r;
    for (int i = 0; i < dim; ++i) r.m[i][i] = 1.0;
    return r;
  }

  Mat &operator+=(const Mat &o) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m[i][j] += o.m[i][j];
    return *this;
  }
  Mat &operator*=(double s) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m[i][j] *= s;
    return *this;
  }
};

template <int dim>
inline Mat<dim> operator+(Mat<dim> a, const Mat<dim> &b) { return a += b; }
template <int dim>
inline Mat<dim> operator*(double s, Mat<dim> a) { return a *= s; }

template <int dim>
inline Vec<dim> operator*(const Mat<dim> &m, const Vec<dim> &v) {
  Vec<dim> r;
  for (int i = 0; i < dim; ++i) r[i] = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i] += m[i][j] * v[j];
  return r;
}

template <int dim>
inline double trace(const Mat<dim> &m) {
  double t = 0;
  for (int i = 0; i < dim; ++i) t += m[i][i];
  return t;
}

/// a ⊗ b
template <int dim>
inline Mat<dim> outer(const Vec<dim> &a, const Vec<dim> &b) {
  Mat<dim> r;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i][j] = a[i] * b[j];
  return r;
}

template <int dim>
inline double max_abs(const Mat<dim> &m) {
  double r = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r = std::max(r, std::abs(m[i][j]));
  return r;
}

/// Axis-aligned box: origin + per-axis extent.
template <int dim>
struct Box {
  Vec<dim> origin;
  Vec<dim> extent;

  double volume() const {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= extent[i];
    return v;
  }
  bool contains(const Vec<dim> &p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < origin[i] || p[i] > origin[i] + extent[i]) return false;
    return true;
  }
};

/// Gauss-Legendre rule on [0,1].  Nodes/weights for n = 1..6.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

const GaussRule &gauss_rule(int n);

/// Distance from a point to a segment [a,b].
template <int dim>
inline double segment_distance(const Vec<dim> &p, const Vec<dim> &a, const Vec<dim> &b) {
  Vec<dim> ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 == 0) return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = std::min(1.0, std::max(0.0, t));
  return distance(p, a + t * ab);
}

}  // namespace vtfem
