#pragma once

#include "vtfem/elasticity.hpp"
#include "vtfem/function.hpp"
#include "vtfem/geom.hpp"

namespace vtfem {

/// Axisymmetric single-vessel configuration: circle of radius a at the
/// origin, excess pressure p, outer Dirichlet radius R.
struct AxisymConfig {
  double R = 1.0;  // outer radius, m
  double a = 0.1;  // vessel radius, m
  double p = 1.0;  // excess pressure, Pa
  Material material;

  void validate() const;
};

/// Exact radial displacement u = p a^2 (R^2 - r^2) / (2 (R^2 mu + la a^2 +
/// mu a^2)) x / r^2 outside the vessel.  Throws at x = 0.
Vec<2> exact_axisym(const AxisymConfig &cfg, const Vec<2> &x);
Mat<2> exact_axisym_gradient(const AxisymConfig &cfg, const Vec<2> &x);

/// Extension of the exact solution inside the vessel: linear in x for
/// |x| < a, continuous across the vessel boundary.
Vec<2> extended_axisym(const AxisymConfig &cfg, const Vec<2> &x);
Mat<2> extended_axisym_gradient(const AxisymConfig &cfg, const Vec<2> &x);

/// Magnitude of the normal-stress jump of the extended solution across
/// |x| = a:  g_a = R^2 p (la + 2 mu) / (R^2 mu + la a^2 + mu a^2).
double jump_ga(const AxisymConfig &cfg);

/// Jump rescaled to a fictitious radius eps:  g_eps = (a/eps)^2 g_a.
double jump_geps(const AxisymConfig &cfg, double eps);

struct AxisymExactField final : VectorFunction<2> {
  AxisymConfig cfg;
  explicit AxisymExactField(const AxisymConfig &c) : cfg(c) {}
  Vec<2> value(const Vec<2> &p) const override { return exact_axisym(cfg, p); }
  Mat<2> gradient(const Vec<2> &p) const override { return exact_axisym_gradient(cfg, p); }
};

struct AxisymExtendedField final : VectorFunction<2> {
  AxisymConfig cfg;
  explicit AxisymExtendedField(const AxisymConfig &c) : cfg(c) {}
  Vec<2> value(const Vec<2> &p) const override { return extended_axisym(cfg, p); }
  Mat<2> gradient(const Vec<2> &p) const override { return extended_axisym_gradient(cfg, p); }
};

/// Homogenized 2D response to a uniform pressurized vessel distribution of
/// volume fraction beta under Neumann conditions: u = c x and a boundary
/// traction of magnitude beta p (2 mu + la) / mu along the outward normal.
struct Homog2D {
  double c;
  double traction;
};
Homog2D homog_2d(const Material &mat, double beta, double p);

/// Homogenized 3D response for vessels aligned along the unit direction tau:
/// u = M x plus the uniform internal stress sigma = p (2mu+la)/mu beta
/// (I - tau x tau); sigma(u) tau = 0 holds by construction.
struct Homog3DAligned {
  Mat<3> displacement_coefficient;  // M
  Mat<3> stress;
};
Homog3DAligned homog_3d_aligned(const Material &mat, double beta, double p, const Vec<3> &tau);

/// Pressurization stress for an anisotropic distribution tensor beta:
/// sigma_p = p (2mu+la)/mu beta.
Mat<3> stress_anisotropic(const Material &mat, const Mat<3> &beta, double p);

/// One family of aligned vessels: volume fraction and unit direction.
struct BetaDirection {
  double beta;
  Vec<3> tau;
};

/// Effective shear modulus seen by a pure-shear experiment of scale c:
/// mu_e = (1 - p (2mu+la)/(c mu^2) sum_k beta_k (tau_k.e_i)(tau_k.e_j)) mu.
double shear_correction(const Material &mat, const std::vector<BetaDirection> &dirs,
                        double p, double c, int i, int j);

/// Stress of the symmetric pure-shear displacement u = (c/2)(e_i x e_j +
/// e_j x e_i) x:  sigma = c mu (e_i x e_j + e_j x e_i).
Mat<3> pure_shear_stress(const Material &mat, double c, int i, int j);

}  // namespace vtfem
