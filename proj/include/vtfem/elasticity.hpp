#pragma once

#include <string>
#include <vector>

#include "vtfem/function.hpp"
#include "vtfem/geom.hpp"
#include "vtfem/mesh.hpp"

namespace vtfem {

/// Isotropic linear-elastic material (Lame pair, Pa).
struct Material {
  double mu = 1.0;      // shear modulus, > 0
  double lambda = 0.0;  // first Lame parameter, >= 0

  void validate() const;
};

enum class BcKind { ClampedZero, DirichletField, TractionFree };

/// Per-face boundary condition.  DirichletField takes nodal values from the
/// attached function; faces default to ClampedZero.
template <int dim>
struct BoundarySpec {
  struct Face {
    BcKind kind = BcKind::ClampedZero;
    const VectorFunction<dim> *field = nullptr;
  };
  std::array<Face, 2 * dim> faces;
  bool allow_pure_neumann = false;

  static BoundarySpec all_clamped() { return {}; }
  static BoundarySpec all_dirichlet(const VectorFunction<dim> &f) {
    BoundarySpec s;
    for (auto &face : s.faces) face = {BcKind::DirichletField, &f};
    return s;
  }
};

/// Compressed-row symmetric sparse matrix.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;

  void multiply(const std::vector<double> &x, std::vector<double> &y) const;
  double max_abs() const;
  /// max_ij |K_ij - K_ji| (structure assumed symmetric).
  double max_asymmetry() const;
};

/// Vector Q1 finite-element function: one coefficient per (node, component),
/// hanging-node constraints satisfied.
template <int dim>
struct Field {
  const Mesh<dim> *mesh = nullptr;
  std::vector<double> coeffs;  // size n_nodes * dim

  Vec<dim> value(int node) const {
    Vec<dim> v;
    for (int a = 0; a < dim; ++a) v[a] = coeffs[std::size_t(node) * dim + a];
    return v;
  }
};

/// Assembled linear system K U = b over the active (unconstrained, not yet /
/// no longer eliminated) degrees of freedom.  Hanging-node constraints are
/// condensed at assembly; apply_bc() eliminates Dirichlet rows and columns
/// symmetrically.
template <int dim>
class SparseSystem {
 public:
  static constexpr int kHanging = -1;
  static constexpr int kDirichlet = -2;

  const Mesh<dim> &mesh() const { return *mesh_; }
  const Material &material() const { return mat_; }
  const CsrMatrix &matrix() const { return K_; }
  const std::vector<double> &rhs() const { return rhs_; }
  int n_active_dofs() const { return K_.n; }
  bool bc_applied() const { return bc_applied_; }

  /// Status of dof (node, comp): active index, kHanging, or kDirichlet.
  int dof_index(int node, int comp) const { return index_[std::size_t(node) * dim + comp]; }
  double dirichlet_value(int node, int comp) const {
    return dirichlet_[std::size_t(node) * dim + comp];
  }

  /// Accumulate a pairing contribution for the test function of (node, comp).
  /// Hanging nodes are routed to their parents; eliminated dofs are dropped.
  void add_rhs(int node, int comp, double value);
  void zero_rhs() { std::fill(rhs_.begin(), rhs_.end(), 0.0); }

  /// Same routing as add_rhs, into an external buffer of n_active size.
  /// Per-source buffers merged in source order keep the assembled rhs an
  /// exact vector sum over sources.
  void accumulate(std::vector<double> &buf, int node, int comp, double value) const;
  void merge_rhs(const std::vector<double> &buf);

  template <int d>
  friend SparseSystem<d> assemble_stiffness(const Mesh<d> &, const Material &);
  template <int d>
  friend void apply_bc(SparseSystem<d> &, const BoundarySpec<d> &);
  template <int d>
  friend Field<d> solve(const SparseSystem<d> &, double, long);

 private:
  const Mesh<dim> *mesh_ = nullptr;
  Material mat_;
  CsrMatrix K_;
  std::vector<double> rhs_;
  std::vector<int> index_;        // node*dim+comp -> active index / kHanging / kDirichlet
  std::vector<double> dirichlet_;  // prescribed values where index_ == kDirichlet
  bool bc_applied_ = false;
};

/// Element stiffness matrix of an axis-aligned Q1 cell with the given sizes,
/// local dof order (corner * dim + component), Gauss order per axis.
template <int dim>
std::vector<double> element_stiffness(const Vec<dim> &sizes, const Material &mat,
                                      int quad_order = 2);

/// K_ij = 2 mu (e(v_j), e(v_i)) + lambda (div v_j, div v_i); rhs zero.
template <int dim>
SparseSystem<dim> assemble_stiffness(const Mesh<dim> &mesh, const Material &mat);

/// Eliminate Dirichlet rows/columns symmetrically; DirichletField values are
/// taken at boundary nodes and moved to the right-hand side.  Throws
/// "singular system" on pure Neumann without the opt-in flag.
template <int dim>
void apply_bc(SparseSystem<dim> &system, const BoundarySpec<dim> &bc);

/// Jacobi-preconditioned conjugate gradients on an SPD matrix down to
/// ||Kx-b|| <= tol ||b||; max_iter < 0 means 10 n.  Throws std::runtime_error
/// (carrying the final residual) if the iteration cap is hit.
std::vector<double> cg_solve(const CsrMatrix &K, const std::vector<double> &b, double tol,
                             long max_iter);

/// Solve the constrained system with cg_solve and expand the solution to a
/// full coefficient vector (free, Dirichlet, then hanging dofs).
template <int dim>
Field<dim> solve(const SparseSystem<dim> &system, double tol = 1e-10, long max_iter = -1);

/// Q1 interpolation at a point (lowest-index incident cell on interfaces).
template <int dim>
Vec<dim> evaluate(const Field<dim> &field, const Vec<dim> &p);

template <int dim>
Mat<dim> evaluate_gradient(const Field<dim> &field, const Vec<dim> &p);

/// Cauchy stress sigma = 2 mu e(u) + lambda I div u from the per-cell gradient.
template <int dim>
Mat<dim> evaluate_stress(const Field<dim> &field, const Material &mat, const Vec<dim> &p);

/// Integral of sigma(u_h) n over the marked boundary face (Gauss order 2 per
/// facet axis).  N in 3D, N/m in 2D.
template <int dim>
Vec<dim> face_force(const Field<dim> &field, const Material &mat, int face_id);

/// Average of u_h over the marked boundary face.
template <int dim>
Vec<dim> face_average_displacement(const Field<dim> &field, int face_id);

struct ErrorNorms {
  double l2 = 0;
  double h1 = 0;  // seminorm
};

/// Masked L2 / H1-seminorm errors against an analytic field (Gauss order 3
/// per axis).  Cells whose center lies within mask_radius of any listed
/// center are excluded when mask_radius > 0.
template <int dim>
ErrorNorms error_norms(const Field<dim> &field, const VectorFunction<dim> &exact,
                       double mask_radius, const std::vector<Vec<dim>> &centers);

/// Interpolate an analytic field onto the FE space (nodal values).
template <int dim>
Field<dim> interpolate(const Mesh<dim> &mesh, const VectorFunction<dim> &f);

extern template class SparseSystem<2>;
extern template class SparseSystem<3>;
extern template std::vector<double> element_stiffness<2>(const Vec<2> &, const Material &, int);
extern template std::vector<double> element_stiffness<3>(const Vec<3> &, const Material &, int);
extern template SparseSystem<2> assemble_stiffness<2>(const Mesh<2> &, const Material &);
extern template SparseSystem<3> assemble_stiffness<3>(const Mesh<3> &, const Material &);
extern template void apply_bc<2>(SparseSystem<2> &, const BoundarySpec<2> &);
extern template void apply_bc<3>(SparseSystem<3> &, const BoundarySpec<3> &);
extern template Field<2> solve<2>(const SparseSystem<2> &, double, long);
extern template Field<3> solve<3>(const SparseSystem<3> &, double, long);
extern template Vec<2> evaluate<2>(const Field<2> &, const Vec<2> &);
extern template Vec<3> evaluate<3>(const Field<3> &, const Vec<3> &);
extern template Mat<2> evaluate_gradient<2>(const Field<2> &, const Vec<2> &);
extern template Mat<3> evaluate_gradient<3>(const Field<3> &, const Vec<3> &);
extern template Mat<2> evaluate_stress<2>(const Field<2> &, const Material &, const Vec<2> &);
extern template Mat<3> evaluate_stress<3>(const Field<3> &, const Material &, const Vec<3> &);
extern template Vec<2> face_force<2>(const Field<2> &, const Material &, int);
extern template Vec<3> face_force<3>(const Field<3> &, const Material &, int);
extern template Vec<2> face_average_displacement<2>(const Field<2> &, int);
extern template Vec<3> face_average_displacement<3>(const Field<3> &, int);
extern template ErrorNorms error_norms<2>(const Field<2> &, const VectorFunction<2> &, double,
                                          const std::vector<Vec<2>> &);
extern template ErrorNorms error_norms<3>(const Field<3> &, const VectorFunction<3> &, double,
                                          const std::vector<Vec<3>> &);
extern template Field<2> interpolate<2>(const Mesh<2> &, const VectorFunction<2> &);
extern template Field<3> interpolate<3>(const Mesh<3> &, const VectorFunction<3> &);

}  // namespace vtfem
