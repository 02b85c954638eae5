#pragma once

#include <vector>

#include "vtfem/geom.hpp"

namespace vtfem {

/// 2D vessel: a pressurized circle (cylinder cross-section).
struct PointVessel2D {
  Vec<2> center;
  double radius = 0;    // m, > 0
  double pressure = 0;  // excess pressure, Pa
};

/// 3D vessel segment: polyline centerline with per-vertex radius and
/// pressure; piecewise-linear interpolation defines a(s) and p(s).
struct VesselSegment3D {
  std::vector<Vec<3>> points;
  std::vector<double> radii;
  std::vector<double> pressures;

  void validate() const;
  double total_length() const;
};

/// A collection of vessels (2D circles or 3D segments) with optional tree
/// topology recorded by the generator (parent segment index, -1 at the root).
struct VesselNetwork {
  int dim = 3;
  std::vector<PointVessel2D> vessels2d;
  std::vector<VesselSegment3D> segments;
  std::vector<int> parent_segment;

  double total_length() const;
};

/// Midpoint-rule quadrature node along a centerline.
struct CenterlineNode {
  Vec<3> point;
  Vec<3> tangent;   // unit edge direction
  double weight;    // arclength weight
  double radius;    // a(s)
  double pressure;  // p(s)
  double a2p;       // a(s)^2 p(s)
  double da2p_ds;   // per-edge slope of the endpoint products a^2 p
};

/// Midpoint nodes per polyline edge with spacing <= max_spacing.
/// Sum of weights equals the segment length.
std::vector<CenterlineNode> arclength_quadrature(const VesselSegment3D &seg,
                                                 double max_spacing);

/// Arclength of the closest centerline point; ties toward smaller s.
double nearest_arclength(const VesselSegment3D &seg, const Vec<3> &p);

/// beta = (1/V) integral over the network of pi a^2 (I - tau x tau) dGamma.
Mat<3> beta_tensor(const VesselNetwork &net, double domain_volume);

/// Direction statistics M = integral of tau x tau dGamma with its
/// eigendecomposition; eigenvalues rescaled so the maximum is one and
/// sorted ascending, eigenvector rows matching.
struct DirectionTensor {
  Mat<3> m;
  Vec<3> eigenvalues;      // rescaled, ascending, max = 1
  Vec<3> raw_eigenvalues;  // ascending
  Mat<3> eigenvectors;     // row i is the eigenvector for eigenvalues[i]
};

DirectionTensor principal_directions(const VesselNetwork &net);

/// Per-direction volume fractions beta_i = L pi a^2 lambda_i /
/// (V (lambda_1 lambda_2 lambda_3)^(1/3)) with rescaled eigenvalues; for
/// varying radius the length-averaged cross-section area replaces pi a^2.
Vec<3> beta_i(const VesselNetwork &net, double domain_volume);

/// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.
/// Eigenvalues ascending; row i of the returned matrix is the i-th
/// eigenvector with its largest-magnitude component made positive.
void jacobi_eigen_3x3(const Mat<3> &m, Vec<3> &eigenvalues, Mat<3> &eigenvectors);

}  // namespace vtfem
