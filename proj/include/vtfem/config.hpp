#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtfem/elasticity.hpp"
#include "vtfem/forcing.hpp"
#include "vtfem/geom.hpp"
#include "vtfem/vessel.hpp"

namespace vtfem {

/// Inline vessel generator request.
struct GeneratorConfig {
  std::string kind;  // "random" | "tree"
  int n = 0;
  double radius = 0.0;       // explicit radius, or 0 with target_beta set
  double target_beta = 0.0;  // sizes the radius when radius == 0
  double balancing_factor = 0.5;
  std::vector<double> root;  // tree root (dim entries)
  double margin = 0.0;       // 0: max(radius, epsilon)
  std::uint64_t seed = 0;
};

struct VesselsConfig {
  std::vector<PointVessel2D> inline2d;
  std::vector<VesselSegment3D> inline3d;
  bool has_generator = false;
  GeneratorConfig generator;
};

/// Parsed, schema-validated experiment configuration (see README for the
/// JSON layout).  Unknown keys anywhere are rejected at parse time.
struct ExperimentConfig {
  std::string experiment;  // converge | solve | stats | tree | homog
  int dim = 2;
  std::vector<double> origin;  // dim entries
  std::vector<double> extent;  // dim entries

  int base_level = 3;
  int local_levels = 0;
  double attractor_radius = 0.0;

  Material material;

  ForcingVariant forcing_variant = ForcingVariant::RHs;
  double forcing_epsilon = 0.0;  // 0 means the "2h" rule

  VesselsConfig vessels;

  std::vector<std::string> bcs;  // per face id: clamped | free | exact

  int realizations = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;

  std::string output_dir = ".";
  bool write_vtk_output = false;

  // converge-specific
  std::vector<int> levels;
  double analytic_R = 1.0;
  double analytic_a = 0.1;
  double analytic_p = 1.0;
  double mask_radius = 0.2;

  // stats/tree/homog-specific
  double pressure = 1.0;
  double beta = 0.0;                  // homog 2D scalar
  std::vector<double> beta_tensor;    // homog 3D: 9 row-major entries (optional)

  static ExperimentConfig from_json_text(const std::string &text);
  static ExperimentConfig from_file(const std::string &path);
  std::string to_json_text() const;
  void validate() const;

  template <int d>
  Box<d> domain_box() const {
    Box<d> b;
    for (int a = 0; a < d; ++a) {
      b.origin[a] = origin[a];
      b.extent[a] = extent[a];
    }
    return b;
  }
};

}  // namespace vtfem
