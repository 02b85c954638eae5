#include "vtfem/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace vtfem {

void AxisymConfig::validate() const {
  material.validate();
  if (!(a > 0 && a < R))
    throw std::invalid_argument("AxisymConfig: 0 < a < R required");
}

namespace {

// Shared denominator 2 (R^2 mu + la a^2 + mu a^2).
double denom(const AxisymConfig &cfg) {
  const double mu = cfg.material.mu, la = cfg.material.lambda;
  return 2.0 * (cfg.R * cfg.R * mu + la * cfg.a * cfg.a + mu * cfg.a * cfg.a);
}

}  // namespace

Vec<2> exact_axisym(const AxisymConfig &cfg, const Vec<2> &x) {
  cfg.validate();
  const double r2 = dot(x, x);
  if (r2 == 0) throw std::domain_error("exact_axisym: undefined at the origin");
  const double C = cfg.p * cfg.a * cfg.a / denom(cfg);
  return (C * (cfg.R * cfg.R - r2) / r2) * x;
}

Mat<2> exact_axisym_gradient(const AxisymConfig &cfg, const Vec<2> &x) {
  cfg.validate();
  const double r2 = dot(x, x);
  if (r2 == 0) throw std::domain_error("exact_axisym_gradient: undefined at the origin");
  const double C = cfg.p * cfg.a * cfg.a / denom(cfg);
  const double R2 = cfg.R * cfg.R;
  Mat<2> g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g[i][j] = -2.0 * C * R2 * x[i] * x[j] / (r2 * r2);
      if (i == j) g[i][j] += C * (R2 / r2 - 1.0);
    }
  return g;
}

Vec<2> extended_axisym(const AxisymConfig &cfg, const Vec<2> &x) {
  cfg.validate();
  const double r2 = dot(x, x);
  if (r2 >= cfg.a * cfg.a) return exact_axisym(cfg, x);
  const double D = cfg.p * (cfg.R * cfg.R - cfg.a * cfg.a) / denom(cfg);
  return D * x;
}

Mat<2> extended_axisym_gradient(const AxisymConfig &cfg, const Vec<2> &x) {
  cfg.validate();
  const double r2 = dot(x, x);
  if (r2 >= cfg.a * cfg.a) return exact_axisym_gradient(cfg, x);
  const double D = cfg.p * (cfg.R * cfg.R - cfg.a * cfg.a) / denom(cfg);
  return D * Mat<2>::identity();
}

double jump_ga(const AxisymConfig &cfg) {
  cfg.validate();
  const double mu = cfg.material.mu, la = cfg.material.lambda;
  return cfg.R * cfg.R * cfg.p * (la + 2.0 * mu) /
         (cfg.R * cfg.R * mu + la * cfg.a * cfg.a + mu * cfg.a * cfg.a);
}

double jump_geps(const AxisymConfig &cfg, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("jump_geps: eps must be > 0");
  return (cfg.a * cfg.a) / (eps * eps) * jump_ga(cfg);
}

Homog2D homog_2d(const Material &mat, double beta, double p) {
  mat.validate();
  if (!(beta >= 0 && beta < 1))
    throw std::invalid_argument("homog_2d: beta must lie in [0,1)");
  Homog2D h;
  h.c = beta * p / (2.0 * mat.mu) * (2.0 * mat.mu + mat.lambda) / (mat.mu + mat.lambda);
  h.traction = beta * p * (2.0 * mat.mu + mat.lambda) / mat.mu;
  return h;
}

Homog3DAligned homog_3d_aligned(const Material &mat, double beta, double p,
                                const Vec<3> &tau) {
  mat.validate();
  if (std::abs(norm(tau) - 1.0) > 1e-12)
    throw std::invalid_argument("homog_3d_aligned: tau must be a unit vector");
  const double mu = mat.mu, la = mat.lambda;
  const Mat<3> tt = outer(tau, tau);

  Homog3DAligned h;
  const double scale = beta * p / (2.0 * mu * mu) * (2.0 * mu + la);
  h.displacement_coefficient =
      scale * (((2.0 * mu + la) / (2.0 * mu + 3.0 * la)) * Mat<3>::identity() + (-1.0) * tt);
  h.stress = (p * (2.0 * mu + la) / mu * beta) * (Mat<3>::identity() + (-1.0) * tt);

  // sigma(u) tau = 0 must hold by construction.
  const Mat<3> &M = h.displacement_coefficient;
  Mat<3> sigma_u;
  const double div = trace(M);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) sigma_u[i][j] = mu * (M[i][j] + M[j][i]);
    sigma_u[i][i] += la * div;
  }
  const Vec<3> res = sigma_u * tau;
  if (norm(res) > 1e-12 * std::max(1.0, max_abs(sigma_u)))
    throw std::logic_error("homog_3d_aligned: sigma(u) tau = 0 identity violated");
  return h;
}

Mat<3> stress_anisotropic(const Material &mat, const Mat<3> &beta, double p) {
  mat.validate();
  return (p * (2.0 * mat.mu + mat.lambda) / mat.mu) * beta;
}

double shear_correction(const Material &mat, const std::vector<BetaDirection> &dirs,
                        double p, double c, int i, int j) {
  mat.validate();
  if (c == 0) throw std::invalid_argument("shear_correction: c must be nonzero");
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (!(dirs[k].beta >= 0))
      throw std::invalid_argument("shear_correction: beta_k must be >= 0");
    if (std::abs(norm(dirs[k].tau) - 1.0) > 1e-12)
      throw std::invalid_argument("shear_correction: tau_k must be unit vectors");
    for (std::size_t l = k + 1; l < dirs.size(); ++l)
      if (std::abs(dot(dirs[k].tau, dirs[l].tau)) > 1e-12)
        throw std::invalid_argument("shear_correction: tau_k must be orthonormal");
  }
  double s = 0;
  for (const auto &d : dirs) s += d.beta * d.tau[i] * d.tau[j];
  return (1.0 - p * (2.0 * mat.mu + mat.lambda) / (c * mat.mu * mat.mu) * s) * mat.mu;
}

Mat<3> pure_shear_stress(const Material &mat, double c, int i, int j) {
  mat.validate();
  Mat<3> s;
  s[i][j] += c * mat.mu;
  s[j][i] += c * mat.mu;
  return s;
}

}  // namespace vtfem
