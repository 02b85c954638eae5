#pragma once

#include <vector>

#include "vtfem/elasticity.hpp"
#include "vtfem/geom.hpp"
#include "vtfem/mesh.hpp"
#include "vtfem/vessel.hpp"

namespace vtfem {

/// Tensor-product cosine approximation of the Dirac delta:
/// delta_eps(x) = eps^-d prod_i theta(x_i/eps), theta(y) = (cos(pi y)+1)/2
/// on (-1,1) and 0 outside.  Unit mass, even, C1, support = closed box of
/// half-width eps.
template <int dim>
struct MollifiedDelta {
  double epsilon;

  explicit MollifiedDelta(double eps);

  double value(const Vec<dim> &x) const;
  Vec<dim> gradient(const Vec<dim> &x) const;
};

enum class ForcingVariant { S, RS, RHs, Homogenized };

/// Which source term to assemble and at which regularization width.
/// epsilon <= 0 selects the "2h" rule: twice the smallest cell diameter.
struct ForcingSpec {
  ForcingVariant variant = ForcingVariant::RHs;
  double epsilon = 0.0;                   // explicit width, or <= 0 for "2h"
  double boundary_spacing_factor = 0.5;   // sample spacing = factor * min cell side
  int support_quad_order = 0;             // 0: default (5 in 2D, 3 in 3D)
};

template <int dim>
double resolve_epsilon(const ForcingSpec &spec, const Mesh<dim> &mesh);

int default_support_quad_order(int dim);

/// (S): singular boundary source.  Each vessel circle is sampled at
/// equispaced points (count >= max(16, circumference / (factor * h))) and the
/// traces of the test functions are paired with g n, g = (2 mu + lambda) p /
/// mu, n pointing outward from the vessel: <F,v> = integral over the circle
/// of g (v . n).  Adds into system.rhs.
void rhs_singular_2d(SparseSystem<2> &system, const std::vector<PointVessel2D> &vessels,
                     const ForcingSpec &spec, int n_quad_override = 0);

/// (RS): regularized singular source; the circle samples are smeared with
/// the mollified delta over the cells in its support (double quadrature).
void rhs_regularized_2d(SparseSystem<2> &system, const std::vector<PointVessel2D> &vessels,
                        const ForcingSpec &spec, int n_quad_override = 0);

/// (RHs): regularized hyper-singular source,
/// <F,v> = sum_i pi a_i^2 g_i integral of delta_eps(x - x_i) div v(x) dx.
void rhs_hypersingular_2d(SparseSystem<2> &system, const std::vector<PointVessel2D> &vessels,
                          const ForcingSpec &spec);

/// 3D (RHs) along centerlines: hyper-singular part pairs g_hat(s) with the
/// planar divergence (div v - tau . (grad v tau)); the tangential part pairs
/// g_hat'(s) with v . tau.  max_spacing <= 0 selects h/2 (smallest cell side).
void rhs_hypersingular_3d(SparseSystem<3> &system, const VesselNetwork &network,
                          const ForcingSpec &spec, double max_spacing = 0.0);

/// Homogenized volumetric source, scalar beta (2D):
/// <F,v> = integral of beta p (2 mu + lambda)/mu div v.
void rhs_homogenized(SparseSystem<2> &system, double beta, double pressure);

/// Homogenized volumetric source, tensor beta (3D):
/// <F,v> = integral of p (2 mu + lambda)/mu tr(beta grad v); beta symmetric.
void rhs_homogenized(SparseSystem<3> &system, const Mat<3> &beta, double pressure);

}  // namespace vtfem
