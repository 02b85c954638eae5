#include "vtfem/vesselgen.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vtfem {

namespace {

const double kPi = 3.14159265358979323846;
const std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : state_(mix64(master_seed ^ mix64(stream_index + kGolden))) {}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::next_double() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_in(double lo, double hi) {
  return lo + next_double() * (hi - lo);
}

std::vector<PointVessel2D> sample_point_vessels(const Box<2> &domain, int n, double radius,
                                                double margin, RngStream &rng,
                                                double pressure) {
  if (n < 1) throw std::invalid_argument("sample_point_vessels: n must be >= 1");
  if (!(radius > 0)) throw std::invalid_argument("sample_point_vessels: radius must be > 0");
  if (!(margin >= radius))
    throw std::invalid_argument("sample_point_vessels: margin must be >= radius");
  if (!(n * kPi * radius * radius < 0.5 * domain.volume()))
    throw std::invalid_argument("sample_point_vessels: packing guard violated (n pi r^2 >= 0.5 |Omega|)");
  Vec<2> lo, hi;
  for (int a = 0; a < 2; ++a) {
    lo[a] = domain.origin[a] + margin;
    hi[a] = domain.origin[a] + domain.extent[a] - margin;
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("sample_point_vessels: margin leaves no sampling area");
  }

  std::vector<PointVessel2D> out;
  out.reserve(n);
  long rejections = 0;
  while (int(out.size()) < n) {
    Vec<2> c{rng.next_in(lo[0], hi[0]), rng.next_in(lo[1], hi[1])};
    bool ok = true;
    for (const auto &v : out)
      if (distance(c, v.center) < 2.0 * radius) {
        ok = false;
        break;
      }
    if (ok) {
      out.push_back({c, radius, pressure});
      rejections = 0;
    } else if (++rejections >= 100000) {
      throw std::runtime_error("sample_point_vessels: packing too dense");
    }
  }
  return out;
}

double radius_for_beta(double total_length, double domain_volume, double target_beta) {
  if (!(total_length > 0 && domain_volume > 0 && target_beta > 0))
    throw std::invalid_argument("radius_for_beta: all inputs must be > 0");
  return std::sqrt(target_beta * domain_volume / (kPi * total_length));
}

VesselNetwork sample_aligned_vessels(const Box<3> &domain, int n, double radius,
                                     double margin, RngStream &rng, double pressure) {
  if (n < 1) throw std::invalid_argument("sample_aligned_vessels: n must be >= 1");
  if (!(radius > 0)) throw std::invalid_argument("sample_aligned_vessels: radius must be > 0");
  if (!(margin >= radius))
    throw std::invalid_argument("sample_aligned_vessels: margin must be >= radius");
  Vec<2> lo, hi;
  for (int a = 0; a < 2; ++a) {
    lo[a] = domain.origin[a] + margin;
    hi[a] = domain.origin[a] + domain.extent[a] - margin;
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("sample_aligned_vessels: margin leaves no sampling area");
  }
  const double z_lo = domain.origin[2] + margin;
  const double z_hi = domain.origin[2] + domain.extent[2] - margin;
  if (!(z_hi > z_lo))
    throw std::invalid_argument("sample_aligned_vessels: margin leaves no vessel span");

  std::vector<Vec<2>> centers;
  centers.reserve(n);
  long rejections = 0;
  while (int(centers.size()) < n) {
    Vec<2> c{rng.next_in(lo[0], hi[0]), rng.next_in(lo[1], hi[1])};
    bool ok = true;
    for (const auto &q : centers)
      if (distance(c, q) < 2.0 * radius) {
        ok = false;
        break;
      }
    if (ok) {
      centers.push_back(c);
      rejections = 0;
    } else if (++rejections >= 100000) {
      throw std::runtime_error("sample_aligned_vessels: packing too dense");
    }
  }

  VesselNetwork net;
  net.dim = 3;
  net.segments.reserve(n);
  for (const auto &c : centers) {
    VesselSegment3D seg;
    seg.points = {{c[0], c[1], z_lo}, {c[0], c[1], z_hi}};
    seg.radii = {radius, radius};
    seg.pressures = {pressure, pressure};
    net.segments.push_back(std::move(seg));
  }
  return net;
}

VesselNetwork build_tree(const TreeConfig &cfg, RngStream &rng) {
  if (cfg.explicit_points.empty() && cfg.n_points < 1)
    throw std::invalid_argument("build_tree: n_points must be >= 1");
  if (!(cfg.balancing_factor >= 0 && cfg.balancing_factor <= 1))
    throw std::invalid_argument("build_tree: balancing factor must lie in [0,1]");
  if (!(cfg.target_beta > 0 && cfg.target_beta < 1))
    throw std::invalid_argument("build_tree: target_beta must lie in (0,1)");

  // Node 0 is the root; nodes 1..n are the irroration points.
  const int n = cfg.explicit_points.empty() ? cfg.n_points : int(cfg.explicit_points.size());
  std::vector<Vec<3>> pos(n + 1);
  pos[0] = cfg.root;
  if (cfg.explicit_points.empty()) {
    for (int i = 1; i <= n; ++i)
      for (int a = 0; a < 3; ++a)
        pos[i][a] = rng.next_in(cfg.domain.origin[a], cfg.domain.origin[a] + cfg.domain.extent[a]);
  } else {
    for (int i = 1; i <= n; ++i) pos[i] = cfg.explicit_points[i - 1];
  }

  const double bf = cfg.balancing_factor;
  std::vector<char> attached(n + 1, 0);
  attached[0] = 1;
  std::vector<double> pathlen(n + 1, 0.0);
  // Best attachment candidate per unattached point, ties toward smaller j.
  std::vector<double> best_cost(n + 1, 0.0);
  std::vector<int> best_j(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    const double d = distance(pos[i], pos[0]);
    best_cost[i] = (1.0 - bf) * d + bf * d;
    best_j[i] = 0;
  }

  std::vector<std::pair<int, int>> edges;  // (parent node, child node) in attach order
  edges.reserve(n);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int i = 1; i <= n; ++i) {
      if (attached[i]) continue;
      if (pick < 0 || best_cost[i] < best_cost[pick] ||
          (best_cost[i] == best_cost[pick] &&
           (best_j[i] < best_j[pick] || (best_j[i] == best_j[pick] && i < pick))))
        pick = i;
    }
    attached[pick] = 1;
    pathlen[pick] = pathlen[best_j[pick]] + distance(pos[pick], pos[best_j[pick]]);
    edges.push_back({best_j[pick], pick});
    for (int i = 1; i <= n; ++i) {
      if (attached[i]) continue;
      const double d = distance(pos[i], pos[pick]);
      const double cost = (1.0 - bf) * d + bf * (pathlen[pick] + d);
      if (cost < best_cost[i] || (cost == best_cost[i] && pick < best_j[i])) {
        best_cost[i] = cost;
        best_j[i] = pick;
      }
    }
  }

  double total_length = 0;
  for (const auto &[j, i] : edges) total_length += distance(pos[j], pos[i]);
  const double volume = cfg.volume_for_beta > 0 ? cfg.volume_for_beta : cfg.domain.volume();
  const double radius = radius_for_beta(total_length, volume, cfg.target_beta);

  VesselNetwork net;
  net.dim = 3;
  net.segments.reserve(edges.size());
  net.parent_segment.reserve(edges.size());
  std::vector<int> segment_of_node(n + 1, -1);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto &[j, i] = edges[k];
    VesselSegment3D seg;
    seg.points = {pos[j], pos[i]};
    seg.radii = {radius, radius};
    seg.pressures = {cfg.pressure, cfg.pressure};
    net.segments.push_back(seg);
    net.parent_segment.push_back(segment_of_node[j]);
    segment_of_node[i] = int(k);
  }
  return net;
}

}  // namespace vtfem
