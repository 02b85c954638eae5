#pragma once

#include <cstdint>
#include <vector>

#include "vtfem/geom.hpp"
#include "vtfem/vessel.hpp"

namespace vtfem {

/// Counter-based 64-bit pseudo-random stream (SplitMix64 walk with a mixed
/// per-stream key; the exact algorithm is documented in the README).
/// Identical (seed, index) pairs produce identical sequences on every
/// platform; distinct indices give independent streams.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double next_double();
  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi);

 private:
  std::uint64_t state_;
};

/// Uniform non-overlapping circles: centers uniform in the margin-shrunk
/// box, pairwise center distance >= 2 radius by rejection.  Requires
/// n pi r^2 < 0.5 |Omega| and margin >= radius; throws "packing too dense"
/// after 1e5 consecutive rejections.
std::vector<PointVessel2D> sample_point_vessels(const Box<2> &domain, int n, double radius,
                                                double margin, RngStream &rng,
                                                double pressure = 0.0);

/// Growth parameters for the balancing-factor spanning trees.
struct TreeConfig {
  int n_points = 100;
  Vec<3> root{};
  double balancing_factor = 0.5;  // 0: minimum spanning tree, 1: star
  double target_beta = 0.05;
  Box<3> domain;
  std::uint64_t seed = 0;
  double pressure = 1.0;
  /// Volume used to size the radius; <= 0 means domain.volume().
  double volume_for_beta = 0.0;
  /// Explicit irroration points; when non-empty they replace the sampling
  /// and n_points is ignored.
  std::vector<Vec<3>> explicit_points;
};

/// Greedy tree growth from the root: each step attaches the unconnected
/// point i to the connected node j minimizing
///   w(i,j) = (1 - bf) dist(i,j) + bf (pathlen(root->j) + dist(i,j)),
/// ties broken by smaller (j, then i).  Edges become 2-point segments with
/// constant radius from radius_for_beta and constant pressure.
VesselNetwork build_tree(const TreeConfig &cfg, RngStream &rng);

/// a = sqrt(beta V / (pi L)).
double radius_for_beta(double total_length, double domain_volume, double target_beta);

/// Uniform non-overlapping straight vessels aligned with the z axis:
/// (x,y) centers uniform in the margin-shrunk cross-section with pairwise
/// distance >= 2 radius; every vessel spans z in [z_lo + margin, z_hi - margin].
VesselNetwork sample_aligned_vessels(const Box<3> &domain, int n, double radius,
                                     double margin, RngStream &rng, double pressure);

}  // namespace vtfem
