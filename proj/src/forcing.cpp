#include "vtfem/forcing.hpp"

#include <cmath>
#include <stdexcept>

#include "vtfem/fe.hpp"

namespace vtfem {

namespace {

const double kPi = 3.14159265358979323846;

double theta(double y) {
  if (y <= -1.0 || y >= 1.0) return 0.0;
  return 0.5 * (std::cos(kPi * y) + 1.0);
}

double theta_prime(double y) {
  if (y <= -1.0 || y >= 1.0) return 0.0;
  return -0.5 * kPi * std::sin(kPi * y);
}

template <int dim>
void check_support_inside(const Box<dim> &box, const Vec<dim> &center, double eps,
                          const char *op) {
  for (int a = 0; a < dim; ++a)
    if (center[a] - eps < box.origin[a] || center[a] + eps > box.origin[a] + box.extent[a])
      throw std::runtime_error(std::string(op) +
                               ": kernel support box crosses the domain boundary");
}

void check_circle_inside(const Box<2> &box, const PointVessel2D &v, const char *op) {
  for (int a = 0; a < 2; ++a)
    if (v.center[a] - v.radius < box.origin[a] ||
        v.center[a] + v.radius > box.origin[a] + box.extent[a])
      throw std::runtime_error(std::string(op) + ": vessel circle leaves the domain");
}

/// Quadrature over the intersections of leaf cells with the kernel support
/// box, where the kernel is analytic: fn(cell, cell-local xi, physical point,
/// weight).  Clipping keeps the C1 kink at the kernel edge off the
/// integration domain, and panels of at most eps/2 per axis limit each Gauss
/// box to a quarter cosine period; for the default eps = 2h this is a single
/// panel per cell.
template <int dim, class F>
void support_quadrature(const Mesh<dim> &mesh, const Vec<dim> &center, double eps,
                        int order, F &&fn) {
  for (int cell : mesh.cells_in_ball(center, eps)) {
    const Box<dim> b = mesh.cell_box(cell);
    Vec<dim> lo, hi;
    std::array<int, dim> n_panels;
    bool empty = false;
    for (int a = 0; a < dim; ++a) {
      lo[a] = std::max(b.origin[a], center[a] - eps);
      hi[a] = std::min(b.origin[a] + b.extent[a], center[a] + eps);
      if (!(hi[a] > lo[a])) empty = true;
      n_panels[a] = empty ? 1 : std::max(1, int(std::ceil((hi[a] - lo[a]) / (0.5 * eps))));
    }
    if (empty) continue;
    std::array<int, dim> panel{};
    while (true) {
      Vec<dim> plo, psize;
      double vol = 1.0;
      for (int a = 0; a < dim; ++a) {
        psize[a] = (hi[a] - lo[a]) / n_panels[a];
        plo[a] = lo[a] + panel[a] * psize[a];
        vol *= psize[a];
      }
      tensor_quadrature<dim>(order, [&](const Vec<dim> &t, double w) {
        Vec<dim> p, xi;
        for (int a = 0; a < dim; ++a) {
          p[a] = plo[a] + psize[a] * t[a];
          xi[a] = (p[a] - b.origin[a]) / b.extent[a];
        }
        fn(cell, xi, p, w * vol);
      });
      int a = 0;
      for (; a < dim; ++a) {
        if (++panel[a] < n_panels[a]) break;
        panel[a] = 0;
      }
      if (a == dim) break;
    }
  }
}

int circle_sample_count(const PointVessel2D &v, const Mesh<2> &mesh, const ForcingSpec &spec,
                        int n_quad_override) {
  if (n_quad_override > 0) return n_quad_override;
  const double spacing = spec.boundary_spacing_factor * mesh.min_cell_side();
  return std::max(16, int(std::ceil(2.0 * kPi * v.radius / spacing)));
}

}  // namespace

template <int dim>
MollifiedDelta<dim>::MollifiedDelta(double eps) : epsilon(eps) {
  if (!(eps > 0)) throw std::invalid_argument("MollifiedDelta: epsilon must be > 0");
}

template <int dim>
double MollifiedDelta<dim>::value(const Vec<dim> &x) const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= theta(x[a] / epsilon) / epsilon;
  return v;
}

template <int dim>
Vec<dim> MollifiedDelta<dim>::gradient(const Vec<dim> &x) const {
  Vec<dim> g;
  for (int a = 0; a < dim; ++a) {
    double v = 1.0;
    for (int b = 0; b < dim; ++b) {
      const double y = x[b] / epsilon;
      v *= (b == a ? theta_prime(y) / epsilon : theta(y)) / epsilon;
    }
    g[a] = v;
  }
  return g;
}

template struct MollifiedDelta<1>;
template struct MollifiedDelta<2>;
template struct MollifiedDelta<3>;

template <int dim>
double resolve_epsilon(const ForcingSpec &spec, const Mesh<dim> &mesh) {
  if (spec.epsilon > 0) return spec.epsilon;
  return 2.0 * mesh.min_cell_diameter();
}

template double resolve_epsilon<2>(const ForcingSpec &, const Mesh<2> &);
template double resolve_epsilon<3>(const ForcingSpec &, const Mesh<3> &);

int default_support_quad_order(int dim) { return dim == 2 ? 5 : 3; }

void rhs_singular_2d(SparseSystem<2> &sys, const std::vector<PointVessel2D> &vessels,
                     const ForcingSpec &spec, int n_quad_override) {
  const Mesh<2> &mesh = sys.mesh();
  const Material &mat = sys.material();
  std::vector<double> buf;
  for (const PointVessel2D &v : vessels) {
    check_circle_inside(mesh.box(), v, "rhs_singular_2d");
    buf.assign(sys.n_active_dofs(), 0.0);
    const double g = (2.0 * mat.mu + mat.lambda) * v.pressure / mat.mu;
    const int nq = circle_sample_count(v, mesh, spec, n_quad_override);
    const double w = 2.0 * kPi * v.radius / nq;
    for (int k = 0; k < nq; ++k) {
      const double phi_k = 2.0 * kPi * k / nq;
      const Vec<2> n{std::cos(phi_k), std::sin(phi_k)};  // outward from the vessel
      const Vec<2> y = v.center + v.radius * n;
      const int cell = mesh.locate_cell(y);
      const Box<2> b = mesh.cell_box(cell);
      double phi[4];
      Vec<2> grad[4];
      q1_basis<2>(local_coords(b, y), b.extent, phi, grad);
      const auto &nodes = mesh.cell_nodes(cell);
      for (int j = 0; j < 4; ++j)
        for (int a = 0; a < 2; ++a) sys.accumulate(buf, nodes[j], a, g * w * phi[j] * n[a]);
    }
    sys.merge_rhs(buf);
  }
}

void rhs_regularized_2d(SparseSystem<2> &sys, const std::vector<PointVessel2D> &vessels,
                        const ForcingSpec &spec, int n_quad_override) {
  const Mesh<2> &mesh = sys.mesh();
  const Material &mat = sys.material();
  const double eps = resolve_epsilon(spec, mesh);
  const MollifiedDelta<2> kernel(eps);
  const int order = spec.support_quad_order > 0 ? spec.support_quad_order
                                                : default_support_quad_order(2);
  std::vector<double> buf;
  for (const PointVessel2D &v : vessels) {
    check_circle_inside(mesh.box(), v, "rhs_regularized_2d");
    buf.assign(sys.n_active_dofs(), 0.0);
    const double g = (2.0 * mat.mu + mat.lambda) * v.pressure / mat.mu;
    const int nq = circle_sample_count(v, mesh, spec, n_quad_override);
    const double w = 2.0 * kPi * v.radius / nq;
    for (int k = 0; k < nq; ++k) {
      const double phi_k = 2.0 * kPi * k / nq;
      const Vec<2> n{std::cos(phi_k), std::sin(phi_k)};
      const Vec<2> y = v.center + v.radius * n;
      support_quadrature<2>(mesh, y, eps, order,
                            [&](int cell, const Vec<2> &xi, const Vec<2> &p, double wx) {
                              const double d = kernel.value(p - y);
                              if (d == 0) return;
                              double phi[4];
                              Vec<2> grad[4];
                              q1_basis<2>(xi, mesh.cell_size(cell), phi, grad);
                              const auto &nodes = mesh.cell_nodes(cell);
                              for (int j = 0; j < 4; ++j)
                                for (int a = 0; a < 2; ++a)
                                  sys.accumulate(buf, nodes[j], a, g * w * wx * d * phi[j] * n[a]);
                            });
    }
    sys.merge_rhs(buf);
  }
}

void rhs_hypersingular_2d(SparseSystem<2> &sys, const std::vector<PointVessel2D> &vessels,
                          const ForcingSpec &spec) {
  const Mesh<2> &mesh = sys.mesh();
  const Material &mat = sys.material();
  const double eps = resolve_epsilon(spec, mesh);
  const MollifiedDelta<2> kernel(eps);
  const int order = spec.support_quad_order > 0 ? spec.support_quad_order
                                                : default_support_quad_order(2);
  std::vector<double> buf;
  for (const PointVessel2D &v : vessels) {
    check_support_inside(mesh.box(), v.center, eps, "rhs_hypersingular_2d");
    buf.assign(sys.n_active_dofs(), 0.0);
    const double coef =
        kPi * v.radius * v.radius * (2.0 * mat.mu + mat.lambda) * v.pressure / mat.mu;
    support_quadrature<2>(mesh, v.center, eps, order,
                          [&](int cell, const Vec<2> &xi, const Vec<2> &p, double wx) {
                            const double d = kernel.value(p - v.center);
                            if (d == 0) return;
                            double phi[4];
                            Vec<2> grad[4];
                            q1_basis<2>(xi, mesh.cell_size(cell), phi, grad);
                            const auto &nodes = mesh.cell_nodes(cell);
                            // div of (phi_j e_a) is d phi_j / d x_a
                            for (int j = 0; j < 4; ++j)
                              for (int a = 0; a < 2; ++a)
                                sys.accumulate(buf, nodes[j], a, coef * wx * d * grad[j][a]);
                          });
    sys.merge_rhs(buf);
  }
}

void rhs_hypersingular_3d(SparseSystem<3> &sys, const VesselNetwork &network,
                          const ForcingSpec &spec, double max_spacing) {
  if (network.dim != 3)
    throw std::invalid_argument("rhs_hypersingular_3d: 3D network required");
  const Mesh<3> &mesh = sys.mesh();
  const Material &mat = sys.material();
  const double eps = resolve_epsilon(spec, mesh);
  const MollifiedDelta<3> kernel(eps);
  const int order = spec.support_quad_order > 0 ? spec.support_quad_order
                                                : default_support_quad_order(3);
  const double spacing = max_spacing > 0 ? max_spacing : 0.5 * mesh.min_cell_side();
  const double lame = (2.0 * mat.mu + mat.lambda) / mat.mu;

  std::vector<double> buf;
  for (const VesselSegment3D &seg : network.segments) {
    buf.assign(sys.n_active_dofs(), 0.0);
    for (const CenterlineNode &node : arclength_quadrature(seg, spacing)) {
      check_support_inside(mesh.box(), node.point, eps, "rhs_hypersingular_3d");
      const double g_hat = kPi * node.a2p * lame;         // pi a^2 p (2mu+la)/mu
      const double g_hat_prime = kPi * node.da2p_ds * lame;
      const Vec<3> tau = node.tangent;
      support_quadrature<3>(
          mesh, node.point, eps, order,
          [&](int cell, const Vec<3> &xi, const Vec<3> &p, double wx) {
            const double d = kernel.value(p - node.point);
            if (d == 0) return;
            double phi[8];
            Vec<3> grad[8];
            q1_basis<3>(xi, mesh.cell_size(cell), phi, grad);
            const auto &nodes = mesh.cell_nodes(cell);
            const double w = node.weight * wx * d;
            for (int j = 0; j < 8; ++j) {
              const double gt = dot(grad[j], tau);
              for (int a = 0; a < 3; ++a) {
                // planar divergence of (phi_j e_a): d_a phi - tau_a (grad phi . tau)
                const double div_tau = grad[j][a] - tau[a] * gt;
                sys.accumulate(buf, nodes[j], a,
                               w * (g_hat * div_tau + g_hat_prime * phi[j] * tau[a]));
              }
            }
          });
    }
    sys.merge_rhs(buf);
  }
}

void rhs_homogenized(SparseSystem<2> &sys, double beta, double pressure) {
  const Mesh<2> &mesh = sys.mesh();
  const Material &mat = sys.material();
  const double coef = beta * pressure * (2.0 * mat.mu + mat.lambda) / mat.mu;
  if (coef == 0) return;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const Box<2> b = mesh.cell_box(cell);
    const double vol = b.volume();
    tensor_quadrature<2>(2, [&](const Vec<2> &xi, double w) {
      double phi[4];
      Vec<2> grad[4];
      q1_basis<2>(xi, b.extent, phi, grad);
      const auto &nodes = mesh.cell_nodes(cell);
      for (int j = 0; j < 4; ++j)
        for (int a = 0; a < 2; ++a) sys.add_rhs(nodes[j], a, coef * w * vol * grad[j][a]);
    });
  }
}

void rhs_homogenized(SparseSystem<3> &sys, const Mat<3> &beta, double pressure) {
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(beta[i][j] - beta[j][i]) > 1e-12 * std::max(1.0, max_abs(beta)))
        throw std::invalid_argument("rhs_homogenized: beta tensor must be symmetric");
  const Mesh<3> &mesh = sys.mesh();
  const Material &mat = sys.material();
  const double coef = pressure * (2.0 * mat.mu + mat.lambda) / mat.mu;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const Box<3> b = mesh.cell_box(cell);
    const double vol = b.volume();
    tensor_quadrature<3>(2, [&](const Vec<3> &xi, double w) {
      double phi[8];
      Vec<3> grad[8];
      q1_basis<3>(xi, b.extent, phi, grad);
      const auto &nodes = mesh.cell_nodes(cell);
      // tr(beta grad(phi_j e_a)) = sum_i beta_ia d_i phi_j
      for (int j = 0; j < 8; ++j)
        for (int a = 0; a < 3; ++a) {
          double v = 0;
          for (int i = 0; i < 3; ++i) v += beta[i][a] * grad[j][i];
          sys.add_rhs(nodes[j], a, coef * w * vol * v);
        }
    });
  }
}

}  // namespace vtfem
