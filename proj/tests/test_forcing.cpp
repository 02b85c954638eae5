#include <doctest.h>

#include <cmath>

#include "vtfem/analytic.hpp"
#include "vtfem/fe.hpp"
#include "vtfem/forcing.hpp"
#include "vtfem/mesh.hpp"

using namespace vtfem;

namespace {

const double kPi = 3.14159265358979323846;

template <int dim>
Mesh<dim> uniform_mesh(int level, Box<dim> box) {
  RefinementSpec<dim> spec;
  spec.base_level = level;
  return build_grid(box, spec);
}

/// <rhs, v> for the interpolant coefficients of an analytic field;
/// sums over ALL nodes so hanging routing is exercised too.
template <int dim>
double pair_with(const SparseSystem<dim> &sys, const VectorFunction<dim> &v) {
  const Mesh<dim> &mesh = sys.mesh();
  const Field<dim> vi = interpolate(mesh, v);
  double s = 0;
  for (int n = 0; n < mesh.n_nodes(); ++n)
    for (int a = 0; a < dim; ++a) {
      const int idx = sys.dof_index(n, a);
      if (idx >= 0) s += sys.rhs()[idx] * vi.coeffs[std::size_t(n) * dim + a];
    }
  return s;
}

/// Composite order-6 quadrature of f over [-eps, eps]^dim (4 panels/axis).
template <int dim, class F>
double box_quadrature(double eps, F &&f) {
  const GaussRule &rule = gauss_rule(6);
  const int panels = 4;
  const double hp = 2 * eps / panels;
  double total = 0;
  std::array<int, dim> panel{}, pt{};
  const int npts = int(rule.points.size());
  while (true) {
    // iterate panels
    std::array<int, dim> q{};
    while (true) {
      Vec<dim> x;
      double w = 1;
      for (int a = 0; a < dim; ++a) {
        x[a] = -eps + (panel[a] + rule.points[q[a]]) * hp;
        w *= rule.weights[q[a]] * hp;
      }
      total += w * f(x);
      int a = 0;
      for (; a < dim; ++a) {
        if (++q[a] < npts) break;
        q[a] = 0;
      }
      if (a == dim) break;
    }
    int a = 0;
    for (; a < dim; ++a) {
      if (++panel[a] < panels) break;
      panel[a] = 0;
    }
    if (a == dim) break;
  }
  (void)pt;
  return total;
}

struct QuadraticXField final : VectorFunction<2> {
  // v = (x^2, 0): div v = 2x
  Vec<2> value(const Vec<2> &p) const override { return {p[0] * p[0], 0.0}; }
  Mat<2> gradient(const Vec<2> &p) const override {
    Mat<2> g;
    g[0][0] = 2 * p[0];
    return g;
  }
};

}  // namespace

TEST_CASE("mollified delta: value, support, symmetry") {
  const MollifiedDelta<2> k(0.25);
  CHECK(k.value({0, 0}) == doctest::Approx(16.0).epsilon(1e-15));  // eps^-2
  CHECK(k.value({0.25, 0.0}) == 0.0);
  CHECK(k.value({0.3, 0.0}) == 0.0);
  CHECK(k.value({0.0, -0.26}) == 0.0);
  for (double x : {0.03, 0.11, 0.21})
    for (double y : {-0.2, 0.07}) {
      CHECK(k.value({x, y}) == doctest::Approx(k.value({-x, -y})).epsilon(1e-15));
      CHECK(k.value({x, y}) >= 0.0);
    }
  CHECK_THROWS_AS(MollifiedDelta<2>(0.0), std::invalid_argument);
}

TEST_CASE("mollified delta: unit mass and zero gradient moment (quadrature oracle)") {
  SUBCASE("2D") {
    const double eps = 0.37;
    const MollifiedDelta<2> k(eps);
    const double mass = box_quadrature<2>(eps, [&](const Vec<2> &x) { return k.value(x); });
    CHECK(std::abs(mass - 1.0) < 1e-8);
    for (int a = 0; a < 2; ++a) {
      const double m =
          box_quadrature<2>(eps, [&](const Vec<2> &x) { return k.gradient(x)[a]; });
      CHECK(std::abs(m) < 1e-8);
    }
  }
  SUBCASE("3D") {
    const double eps = 0.21;
    const MollifiedDelta<3> k(eps);
    const double mass = box_quadrature<3>(eps, [&](const Vec<3> &x) { return k.value(x); });
    CHECK(std::abs(mass - 1.0) < 1e-8);
    const double mz = box_quadrature<3>(eps, [&](const Vec<3> &x) { return k.gradient(x)[2]; });
    CHECK(std::abs(mz) < 1e-8);
  }
}

TEST_CASE("mollified delta is C1: gradient matches finite differences and vanishes at the edge") {
  const double eps = 0.4;
  const MollifiedDelta<2> k(eps);
  const double h = 1e-7;
  for (const Vec<2> x : {Vec<2>{0.1, 0.05}, Vec<2>{-0.3, 0.2}, Vec<2>{0.39, 0.0}}) {
    const Vec<2> g = k.gradient(x);
    for (int a = 0; a < 2; ++a) {
      Vec<2> xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      CHECK(g[a] == doctest::Approx((k.value(xp) - k.value(xm)) / (2 * h)).epsilon(1e-5));
    }
  }
  // C1 across the support boundary: gradient tends to zero
  CHECK(norm(k.gradient({0.4 - 1e-9, 0.0})) < 1e-6);
  CHECK(norm(k.gradient({0.41, 0.1})) == 0.0);
}

TEST_CASE("singular 2D source: closed-curve and linear-field pairings") {
  const Mesh<2> mesh = uniform_mesh<2>(5, {{0, 0}, {1, 1}});
  const Material mat{1.0, 1.0};
  const double a = 0.1, p = 2.0;
  const std::vector<PointVessel2D> vessels = {{{0.5, 0.5}, a, p}};
  ForcingSpec spec;
  spec.variant = ForcingVariant::S;

  SparseSystem<2> sys = assemble_stiffness(mesh, mat);
  rhs_singular_2d(sys, vessels, spec, 4096);

  // <F, const> = g * integral of n over the circle = 0
  const ConstantFunction<2> c({0.7, -0.3});
  CHECK(std::abs(pair_with(sys, c)) < 1e-12);

  // <F, x> = g * 2 pi a^2 (the interpolant of x is exact, so any sample
  // count integrates the linear trace up to rounding)
  const LinearFunction<2> vx(Mat<2>::identity(), {0, 0});
  const double exact = (2 * mat.mu + mat.lambda) * p / mat.mu * 2 * kPi * a * a;
  const double fine = pair_with(sys, vx);
  CHECK(fine == doctest::Approx(exact).epsilon(1e-12));

  // a curved test field exposes the sampling resolution:
  // <F, (x^2, 0)> = g * 2 pi a^2 c_x, approached as the count grows
  const QuadraticXField vq;
  const double exact_q = (2 * mat.mu + mat.lambda) * p / mat.mu * 2 * kPi * a * a * 0.5;
  const double fine_q = pair_with(sys, vq);
  SparseSystem<2> coarse = assemble_stiffness(mesh, mat);
  rhs_singular_2d(coarse, vessels, spec, 64);
  const double coarse_q = pair_with(coarse, vq);
  // interpolation of x^2 leaves an O(h^2) gap; the sampling error vanishes
  CHECK(std::abs(fine_q - exact_q) < 5e-4 * std::abs(exact_q));
  CHECK(std::abs(fine_q - exact_q) <= std::abs(coarse_q - exact_q));

  // p = 0 gives the zero vector
  SparseSystem<2> zero_sys = assemble_stiffness(mesh, mat);
  rhs_singular_2d(zero_sys, {{{0.5, 0.5}, a, 0.0}}, spec);
  for (double v : zero_sys.rhs()) CHECK(v == 0.0);

  // circle leaving the domain
  SparseSystem<2> bad = assemble_stiffness(mesh, mat);
  CHECK_THROWS_AS(rhs_singular_2d(bad, {{{0.05, 0.5}, a, p}}, spec), std::runtime_error);
}

TEST_CASE("regularized singular 2D source") {
  const Mesh<2> mesh = uniform_mesh<2>(5, {{0, 0}, {1, 1}});
  const Material mat{1.0, 0.5};
  const double a = 0.1, p = 1.5;
  const std::vector<PointVessel2D> vessels = {{{0.5, 0.5}, a, p}};

  ForcingSpec spec;
  spec.variant = ForcingVariant::RS;
  SparseSystem<2> sys = assemble_stiffness(mesh, mat);
  rhs_regularized_2d(sys, vessels, spec);

  // unit kernel mass x closed-curve integral of n = 0
  const ConstantFunction<2> c({1.0, 1.0});
  CHECK(std::abs(pair_with(sys, c)) < 1e-10);

  // smearing a symmetric unit-mass kernel reproduces linear fields exactly,
  // so the (RS) pairing with v = x matches (S) up to quadrature noise
  const LinearFunction<2> vx(Mat<2>::identity(), {0, 0});
  SparseSystem<2> sing = assemble_stiffness(mesh, mat);
  ForcingSpec sspec;
  sspec.variant = ForcingVariant::S;
  rhs_singular_2d(sing, vessels, sspec);
  CHECK(pair_with(sys, vx) == doctest::Approx(pair_with(sing, vx)).epsilon(1e-8));

  // (RS) -> (S) as eps -> 0 on a fixed fine mesh, for a curved test field.
  // Against discrete test functions the difference saturates at the
  // (eps-independent) trace-interpolation floor while eps >~ h; genuine
  // first-order decay appears once the kernel width drops below h.
  const QuadraticXField vq;
  const double s_ref = pair_with(sing, vq);
  const double h = mesh.min_cell_side();
  double errs[3];
  int k = 0;
  for (double eps : {4 * h, h / 4, h / 16}) {
    SparseSystem<2> rs = assemble_stiffness(mesh, mat);
    ForcingSpec es;
    es.variant = ForcingVariant::RS;
    es.epsilon = eps;
    rhs_regularized_2d(rs, vessels, es);
    errs[k++] = std::abs(pair_with(rs, vq) - s_ref);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  // roughly first order between h/4 and h/16
  const double rate = std::log(errs[1] / errs[2]) / std::log(4.0);
  CHECK(rate > 0.5);
  CHECK(errs[2] < 2e-6 * std::abs(s_ref));

  // p = 0 gives the zero vector
  SparseSystem<2> zero_sys = assemble_stiffness(mesh, mat);
  rhs_regularized_2d(zero_sys, {{{0.5, 0.5}, a, 0.0}}, spec);
  for (double v : zero_sys.rhs()) CHECK(v == 0.0);
}

TEST_CASE("hyper-singular 2D source") {
  const Mesh<2> mesh = uniform_mesh<2>(5, {{0, 0}, {1, 1}});
  const Material mat{1.0, 1.0};
  const double a = 0.1, p = 1.0;
  const std::vector<PointVessel2D> vessels = {{{0.5, 0.5}, a, p}};
  ForcingSpec spec;
  spec.variant = ForcingVariant::RHs;

  SparseSystem<2> sys = assemble_stiffness(mesh, mat);
  rhs_hypersingular_2d(sys, vessels, spec);

  // pairing with the interpolant of v = x (div v = 2 exactly):
  // 2 pi a^2 (2mu+la) p / mu = 0.1884956
  const LinearFunction<2> vx(Mat<2>::identity(), {0, 0});
  const double exact = 2 * kPi * a * a * (2 * mat.mu + mat.lambda) * p / mat.mu;
  CHECK(exact == doctest::Approx(0.18849556).epsilon(1e-6));
  CHECK(pair_with(sys, vx) == doctest::Approx(exact).epsilon(1e-6));

  // constant fields pair to zero (div = 0)
  const ConstantFunction<2> c({0.4, 0.9});
  CHECK(std::abs(pair_with(sys, c)) < 1e-13);

  // two identical vessels give exactly twice the single-vessel rhs
  SparseSystem<2> twice = assemble_stiffness(mesh, mat);
  rhs_hypersingular_2d(twice, {vessels[0], vessels[0]}, spec);
  for (int i = 0; i < twice.n_active_dofs(); ++i)
    CHECK(twice.rhs()[i] == 2.0 * sys.rhs()[i]);

  // support box crossing the boundary is refused
  SparseSystem<2> bad = assemble_stiffness(mesh, mat);
  CHECK_THROWS_AS(rhs_hypersingular_2d(bad, {{{0.05, 0.5}, a, p}}, spec),
                  std::runtime_error);

  // quadratic field: pairing approximates pi a^2 g div v(center) = 2 pi a^2 g c_x
  const QuadraticXField vq;
  const double coef = kPi * a * a * (2 * mat.mu + mat.lambda) * p / mat.mu;
  CHECK(pair_with(sys, vq) == doctest::Approx(coef * 2 * 0.5).epsilon(0.02));
}

TEST_CASE("hyper-singular 3D source along a straight vessel") {
  const Mesh<3> mesh = uniform_mesh<3>(4, {{0, 0, 0}, {1, 1, 1}});
  const Material mat{1.0, 1.0};
  const double a = 0.01, p = 1.0;
  const double eps = resolve_epsilon(ForcingSpec{}, mesh);
  const double zlo = 0.25, zhi = 0.75;  // keep the kernel support inside

  VesselNetwork net;
  net.dim = 3;
  VesselSegment3D seg;
  seg.points = {{0.5, 0.5, zlo}, {0.5, 0.5, zhi}};
  seg.radii = {a, a};
  seg.pressures = {p, p};
  net.segments = {seg};
  REQUIRE(zlo - eps > 0.0);

  ForcingSpec spec;
  spec.variant = ForcingVariant::RHs;
  SparseSystem<3> sys = assemble_stiffness(mesh, mat);
  rhs_hypersingular_3d(sys, net, spec);

  // planar divergence of v = (x, y, 0) is 2; expect 2 L pi a^2 (2mu+la) p/mu
  Mat<3> A{};
  A[0][0] = 1.0;
  A[1][1] = 1.0;
  const LinearFunction<3> vxy(A, {0, 0, 0});
  const double L = zhi - zlo;
  const double exact = 2 * L * kPi * a * a * (2 * mat.mu + mat.lambda) * p / mat.mu;
  CHECK(pair_with(sys, vxy) == doctest::Approx(exact).epsilon(1e-5));

  // constant fields: hyper part pairs planar-div = 0, tangential part has
  // g_hat' = 0 for constant a, p -> exactly zero pairing
  const ConstantFunction<3> c({0.3, -0.4, 0.9});
  CHECK(std::abs(pair_with(sys, c)) < 1e-12 * std::abs(exact));

  // support crossing the boundary is refused
  VesselNetwork low = net;
  low.segments[0].points[0][2] = 0.05;
  SparseSystem<3> bad = assemble_stiffness(mesh, mat);
  CHECK_THROWS_AS(rhs_hypersingular_3d(bad, low, spec), std::runtime_error);
}

TEST_CASE("3D tangential term activates for varying a^2 p and telescopes") {
  const Mesh<3> mesh = uniform_mesh<3>(4, {{0, 0, 0}, {1, 1, 1}});
  const Material mat{1.0, 2.0};
  VesselNetwork net;
  net.dim = 3;
  VesselSegment3D seg;
  seg.points = {{0.5, 0.5, 0.3}, {0.5, 0.5, 0.7}};
  seg.radii = {0.01, 0.02};
  seg.pressures = {1.0, 3.0};
  net.segments = {seg};

  ForcingSpec spec;
  SparseSystem<3> sys = assemble_stiffness(mesh, mat);
  rhs_hypersingular_3d(sys, net, spec);

  // <F, c> reduces to the tangential part: (2mu+la)/mu pi (a^2 p)|_0^L (c.tau)
  const Vec<3> cv{0.2, -0.1, 0.5};
  const ConstantFunction<3> c(cv);
  const double lame = (2 * mat.mu + mat.lambda) / mat.mu;
  const double expected = lame * kPi * (0.02 * 0.02 * 3.0 - 0.01 * 0.01 * 1.0) * cv[2];
  CHECK(pair_with(sys, c) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("a z-aligned 3D vessel reduces to the 2D formula per unit length") {
  const double eps = 0.1;
  const double a = 0.02, p = 1.3;
  const Material mat{1.0, 1.0};

  ForcingSpec spec2;
  spec2.variant = ForcingVariant::RHs;
  spec2.epsilon = eps;
  spec2.support_quad_order = 5;
  const Mesh<2> mesh2 = uniform_mesh<2>(5, {{0, 0}, {1, 1}});
  SparseSystem<2> sys2 = assemble_stiffness(mesh2, mat);
  rhs_hypersingular_2d(sys2, {{{0.5, 0.5}, a, p}}, spec2);
  const LinearFunction<2> vx2(Mat<2>::identity(), {0, 0});
  const double pairing_2d = pair_with(sys2, vx2);

  ForcingSpec spec3 = spec2;
  const Mesh<3> mesh3 = uniform_mesh<3>(4, {{0, 0, 0}, {1, 1, 1}});
  SparseSystem<3> sys3 = assemble_stiffness(mesh3, mat);
  VesselNetwork net;
  net.dim = 3;
  VesselSegment3D seg;
  seg.points = {{0.5, 0.5, 0.2}, {0.5, 0.5, 0.8}};
  seg.radii = {a, a};
  seg.pressures = {p, p};
  net.segments = {seg};
  rhs_hypersingular_3d(sys3, net, spec3);
  Mat<3> A{};
  A[0][0] = 1.0;
  A[1][1] = 1.0;
  const LinearFunction<3> vxy(A, {0, 0, 0});
  const double pairing_3d = pair_with(sys3, vxy);

  const double L = 0.6;
  CHECK(pairing_3d / L == doctest::Approx(pairing_2d).epsilon(2e-5));
}

TEST_CASE("homogenized volumetric source") {
  const Material mat{1.0, 1.0};
  SUBCASE("2D scalar beta") {
    const Mesh<2> mesh = uniform_mesh<2>(4, {{0, 0}, {1, 1}});
    SparseSystem<2> sys = assemble_stiffness(mesh, mat);
    rhs_homogenized(sys, 0.05, 1.0);
    // <F, x> = beta p (2mu+la)/mu * div(x) * |Omega| = 0.05 * 3 * 2 * 1
    const LinearFunction<2> vx(Mat<2>::identity(), {0, 0});
    CHECK(pair_with(sys, vx) == doctest::Approx(0.30).epsilon(1e-13));

    SparseSystem<2> zero = assemble_stiffness(mesh, mat);
    rhs_homogenized(zero, 0.0, 1.0);
    for (double v : zero.rhs()) CHECK(v == 0.0);
  }
  SUBCASE("3D tensor beta") {
    const Mesh<3> mesh = uniform_mesh<3>(2, {{0, 0, 0}, {1, 1, 1}});
    SparseSystem<3> sys = assemble_stiffness(mesh, mat);
    Mat<3> beta{};
    beta[0][0] = beta[1][1] = 0.05;  // beta0 (I - ez x ez)
    rhs_homogenized(sys, beta, 1.0);
    // v = (0,0,z): tr(beta grad v) = beta_zz = 0
    Mat<3> Az{};
    Az[2][2] = 1.0;
    const LinearFunction<3> vz(Az, {0, 0, 0});
    CHECK(std::abs(pair_with(sys, vz)) < 1e-14);
    // v = x pairs with tr(beta) * p * (2mu+la)/mu
    const LinearFunction<3> vx(Mat<3>::identity(), {0, 0, 0});
    CHECK(pair_with(sys, vx) == doctest::Approx(0.1 * 3.0).epsilon(1e-13));

    Mat<3> skew{};
    skew[0][1] = 0.1;
    SparseSystem<3> bad = assemble_stiffness(mesh, mat);
    CHECK_THROWS_AS(rhs_homogenized(bad, skew, 1.0), std::invalid_argument);
  }
}

TEST_CASE("epsilon resolution: explicit value or twice the smallest cell diameter") {
  const Mesh<2> mesh = uniform_mesh<2>(4, {{0, 0}, {1, 1}});
  ForcingSpec spec;
  CHECK(resolve_epsilon(spec, mesh) ==
        doctest::Approx(2.0 * std::sqrt(2.0) / 16.0).epsilon(1e-15));
  spec.epsilon = 0.123;
  CHECK(resolve_epsilon(spec, mesh) == 0.123);

  RefinementSpec<2> rs;
  rs.base_level = 3;
  rs.local_levels = 2;
  rs.attractor_points = {{0.5, 0.5}};
  rs.attractor_radius = 0.1;
  const Mesh<2> refined = build_grid(Box<2>{{0, 0}, {1, 1}}, rs);
  ForcingSpec auto_spec;
  CHECK(resolve_epsilon(auto_spec, refined) ==
        doctest::Approx(2.0 * std::sqrt(2.0) / 32.0).epsilon(1e-15));
}

TEST_CASE("solution symmetry: centered vessel on a mirror-symmetric mesh") {
  const Mesh<2> mesh = uniform_mesh<2>(5, {{0, 0}, {1, 1}});
  const Material mat{1.0, 1.0};
  SparseSystem<2> sys = assemble_stiffness(mesh, mat);
  ForcingSpec spec;
  rhs_hypersingular_2d(sys, {{{0.5, 0.5}, 0.05, 1.0}}, spec);
  apply_bc(sys, BoundarySpec<2>::all_clamped());
  const Field<2> u = solve(sys);

  double umax = 0;
  for (double v : u.coeffs) umax = std::max(umax, std::abs(v));
  REQUIRE(umax > 0);
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const Vec<2> p = mesh.node(n);
    const Vec<2> q{1.0 - p[0], p[1]};
    const int m = [&] {
      for (int k = 0; k < mesh.n_nodes(); ++k)
        if (distance(mesh.node(k), q) < 1e-14) return k;
      return -1;
    }();
    REQUIRE(m >= 0);
    CHECK(u.coeffs[2 * n] == doctest::Approx(-u.coeffs[2 * m]).epsilon(1e-10).scale(umax));
    CHECK(u.coeffs[2 * n + 1] == doctest::Approx(u.coeffs[2 * m + 1]).epsilon(1e-10).scale(umax));
  }
}
