#include "vtfem/vessel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vtfem {

void VesselSegment3D::validate() const {
  if (points.size() < 2)
    throw std::invalid_argument("VesselSegment3D: at least two polyline points required");
  if (radii.size() != points.size() || pressures.size() != points.size())
    throw std::invalid_argument("VesselSegment3D: radii/pressures must match points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (distance(points[i], points[i + 1]) == 0)
      throw std::invalid_argument("VesselSegment3D: consecutive points must be distinct");
  for (double a : radii)
    if (!(a > 0)) throw std::invalid_argument("VesselSegment3D: radii must be positive");
}

double VesselSegment3D::total_length() const {
  double len = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    len += distance(points[i], points[i + 1]);
  return len;
}

double VesselNetwork::total_length() const {
  double len = 0;
  for (const auto &s : segments) len += s.total_length();
  return len;
}

std::vector<CenterlineNode> arclength_quadrature(const VesselSegment3D &seg,
                                                 double max_spacing) {
  if (!(max_spacing > 0))
    throw std::invalid_argument("arclength_quadrature: max_spacing must be > 0");
  seg.validate();
  std::vector<CenterlineNode> nodes;
  for (std::size_t e = 0; e + 1 < seg.points.size(); ++e) {
    const Vec<3> &p0 = seg.points[e];
    const Vec<3> &p1 = seg.points[e + 1];
    const double len = distance(p0, p1);
    const Vec<3> tau = (1.0 / len) * (p1 - p0);
    const int n = std::max(1, int(std::ceil(len / max_spacing)));
    const double w = len / n;
    const double a2p0 = seg.radii[e] * seg.radii[e] * seg.pressures[e];
    const double a2p1 = seg.radii[e + 1] * seg.radii[e + 1] * seg.pressures[e + 1];
    const double slope = (a2p1 - a2p0) / len;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) / n;
      CenterlineNode node;
      node.point = p0 + t * (p1 - p0);
      node.tangent = tau;
      node.weight = w;
      node.radius = seg.radii[e] + t * (seg.radii[e + 1] - seg.radii[e]);
      node.pressure = seg.pressures[e] + t * (seg.pressures[e + 1] - seg.pressures[e]);
      node.a2p = node.radius * node.radius * node.pressure;
      node.da2p_ds = slope;
      nodes.push_back(node);
    }
  }
  return nodes;
}

double nearest_arclength(const VesselSegment3D &seg, const Vec<3> &p) {
  seg.validate();
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0;
  double s0 = 0;
  for (std::size_t e = 0; e + 1 < seg.points.size(); ++e) {
    const Vec<3> &a = seg.points[e];
    const Vec<3> &b = seg.points[e + 1];
    const Vec<3> ab = b - a;
    const double len2 = dot(ab, ab);
    double t = dot(p - a, ab) / len2;
    t = std::min(1.0, std::max(0.0, t));
    const Vec<3> q = a + t * ab;
    const double d2 = dot(p - q, p - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s0 + t * std::sqrt(len2);
    }
    s0 += std::sqrt(len2);
  }
  return best_s;
}

namespace {

const double kPi = 3.14159265358979323846;

void require_3d(const VesselNetwork &net, const char *op) {
  if (net.dim != 3 || net.segments.empty())
    throw std::invalid_argument(std::string(op) + ": 3D network with segments required");
}

/// Per-edge Gauss-3 quadrature of f(a(s)) tau x tau over the network
/// (exact for a quadratic integrand along each edge).
template <class F>
Mat<3> edge_quadrature(const VesselNetwork &net, F &&weight_of_radius) {
  Mat<3> m;
  const GaussRule &rule = gauss_rule(3);
  for (const auto &seg : net.segments) {
    seg.validate();
    for (std::size_t e = 0; e + 1 < seg.points.size(); ++e) {
      const double len = distance(seg.points[e], seg.points[e + 1]);
      const Vec<3> tau = (1.0 / len) * (seg.points[e + 1] - seg.points[e]);
      const Mat<3> tt = outer(tau, tau);
      double wsum = 0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double t = rule.points[q];
        const double a = seg.radii[e] + t * (seg.radii[e + 1] - seg.radii[e]);
        wsum += rule.weights[q] * weight_of_radius(a);
      }
      m += (len * wsum) * tt;
    }
  }
  return m;
}

}  // namespace

Mat<3> beta_tensor(const VesselNetwork &net, double domain_volume) {
  require_3d(net, "beta_tensor");
  if (!(domain_volume > 0))
    throw std::invalid_argument("beta_tensor: domain volume must be > 0");
  // integral of pi a^2 tau x tau, and of pi a^2 alone for the I part
  const Mat<3> mtt = edge_quadrature(net, [](double a) { return kPi * a * a; });
  double area_len = 0;
  {
    const GaussRule &rule = gauss_rule(3);
    for (const auto &seg : net.segments)
      for (std::size_t e = 0; e + 1 < seg.points.size(); ++e) {
        const double len = distance(seg.points[e], seg.points[e + 1]);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const double t = rule.points[q];
          const double a = seg.radii[e] + t * (seg.radii[e + 1] - seg.radii[e]);
          area_len += len * rule.weights[q] * kPi * a * a;
        }
      }
  }
  Mat<3> beta = area_len * Mat<3>::identity() + (-1.0) * mtt;
  beta *= 1.0 / domain_volume;
  return beta;
}

DirectionTensor principal_directions(const VesselNetwork &net) {
  require_3d(net, "principal_directions");
  if (!(net.total_length() > 0))
    throw std::invalid_argument("principal_directions: total length must be > 0");
  DirectionTensor d;
  d.m = edge_quadrature(net, [](double) { return 1.0; });
  jacobi_eigen_3x3(d.m, d.raw_eigenvalues, d.eigenvectors);
  const double lmax = d.raw_eigenvalues[2];
  for (int i = 0; i < 3; ++i) d.eigenvalues[i] = d.raw_eigenvalues[i] / lmax;
  return d;
}

Vec<3> beta_i(const VesselNetwork &net, double domain_volume) {
  require_3d(net, "beta_i");
  if (!(domain_volume > 0))
    throw std::invalid_argument("beta_i: domain volume must be > 0");
  const DirectionTensor d = principal_directions(net);
  for (int i = 0; i < 3; ++i)
    if (!(d.eigenvalues[i] > 0))
      throw std::runtime_error("beta_i: degenerate direction distribution");
  const double length = net.total_length();
  double area_len = 0;  // integral of pi a^2 dGamma
  {
    const GaussRule &rule = gauss_rule(3);
    for (const auto &seg : net.segments)
      for (std::size_t e = 0; e + 1 < seg.points.size(); ++e) {
        const double len = distance(seg.points[e], seg.points[e + 1]);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const double t = rule.points[q];
          const double a = seg.radii[e] + t * (seg.radii[e + 1] - seg.radii[e]);
          area_len += len * rule.weights[q] * kPi * a * a;
        }
      }
  }
  const double mean_area = area_len / length;
  const double geo =
      std::cbrt(d.eigenvalues[0] * d.eigenvalues[1] * d.eigenvalues[2]);
  Vec<3> beta;
  for (int i = 0; i < 3; ++i)
    beta[i] = length * mean_area * d.eigenvalues[i] / (domain_volume * geo);
  return beta;
}

void jacobi_eigen_3x3(const Mat<3> &m, Vec<3> &eigenvalues, Mat<3> &eigenvectors) {
  double a[3][3];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m[i][j];

  double fro = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fro += a[i][j] * a[i][j];
  fro = std::sqrt(fro);
  const double tol = 1e-12 * std::max(fro, 1e-300);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
    if (off <= tol) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }

  int order[3] = {0, 1, 2};
  std::sort(order, order + 3, [&](int i, int j) { return a[i][i] < a[j][j]; });
  for (int i = 0; i < 3; ++i) {
    eigenvalues[i] = a[order[i]][order[i]];
    Vec<3> ev;
    for (int k = 0; k < 3; ++k) ev[k] = v[k][order[i]];
    // Deterministic sign: largest-magnitude component positive.
    int big = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(ev[k]) > std::abs(ev[big])) big = k;
    if (ev[big] < 0) ev *= -1.0;
    for (int k = 0; k < 3; ++k) eigenvectors[i][k] = ev[k];
  }
}

}  // namespace vtfem
