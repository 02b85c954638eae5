#pragma once

#include <memory>

#include "vtfem/analytic.hpp"
#include "vtfem/config.hpp"
#include "vtfem/io.hpp"
#include "vtfem/vesselgen.hpp"

namespace vtfem {

/// Mesh-size convergence sweep against the axisymmetric oracle:
/// rows (level, dofs, h, l2_error, h1_error, l2_rate, h1_rate) with
/// rate_k = log2(e_{k-1} / e_k).
CsvTable run_converge(const ExperimentConfig &cfg);

/// Per-face force statistics over seeded realizations of random vessel
/// placements (2D circles or z-aligned 3D vessels), plus mean / std /
/// homogenized-prediction summary rows.  Output is independent of
/// run.threads; realization r always draws from stream (master_seed, r).
CsvTable run_stats(const ExperimentConfig &cfg);

struct TreeRun {
  CsvTable table;
  VesselNetwork network;
  std::shared_ptr<Mesh<3>> mesh;  // keeps field.mesh alive
  Field<3> field;
};

/// Generate a balancing-factor tree, report its direction statistics, solve
/// with the regularized hyper-singular forcing, and emit the 3x3 traction
/// matrix M_ij = F_{i+}.e_j - F_{i-}.e_j.
TreeRun run_tree(const ExperimentConfig &cfg);

struct HomogRun {
  CsvTable table;
  std::shared_ptr<Mesh<2>> mesh2d;
  std::shared_ptr<Mesh<3>> mesh3d;
  Field<2> field2d;
  Field<3> field3d;
};

/// Solve with the homogenized volumetric source and compare face forces
/// against the closed-form predictions.
HomogRun run_homog(const ExperimentConfig &cfg);

struct SolveRun {
  CsvTable table;
  std::shared_ptr<Mesh<2>> mesh2d;
  std::shared_ptr<Mesh<3>> mesh3d;
  Field<2> field2d;
  Field<3> field3d;
  VesselNetwork network;
};

/// One configured solve: mesh, vessels (inline or generated), forcing,
/// boundary conditions; reports per-face forces.
SolveRun run_solve(const ExperimentConfig &cfg);

/// Dispatch on cfg.experiment and write all outputs (CSV, optional VTK,
/// network files) into cfg.output_dir.  Returns the primary CSV path.
std::string run_experiment(const ExperimentConfig &cfg);

/// Translate a function by a fixed offset (field centered at a vessel).
template <int dim>
struct ShiftedFunction final : VectorFunction<dim> {
  const VectorFunction<dim> *base;
  Vec<dim> shift;
  ShiftedFunction(const VectorFunction<dim> &f, const Vec<dim> &s) : base(&f), shift(s) {}
  Vec<dim> value(const Vec<dim> &p) const override { return base->value(p - shift); }
  Mat<dim> gradient(const Vec<dim> &p) const override { return base->gradient(p - shift); }
};

}  // namespace vtfem
