#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vtfem/io.hpp"
#include "vtfem/vesselgen.hpp"

using namespace vtfem;

namespace {

const double kPi = 3.14159265358979323846;

/// Textbook Prim over the full graph (root = node 0), independent of the
/// growth implementation: returns the set of (min(i,j), max(i,j)) edges.
std::set<std::pair<int, int>> prim_mst(const std::vector<Vec<3>> &pos) {
  const int n = int(pos.size());
  std::vector<char> in_tree(n, 0);
  std::vector<double> dist(n, 1e300);
  std::vector<int> link(n, 0);
  in_tree[0] = 1;
  for (int i = 1; i < n; ++i) {
    dist[i] = distance(pos[i], pos[0]);
    link[i] = 0;
  }
  std::set<std::pair<int, int>> edges;
  for (int step = 1; step < n; ++step) {
    int best = -1;
    for (int i = 1; i < n; ++i)
      if (!in_tree[i] && (best < 0 || dist[i] < dist[best])) best = i;
    in_tree[best] = 1;
    edges.insert({std::min(best, link[best]), std::max(best, link[best])});
    for (int i = 1; i < n; ++i)
      if (!in_tree[i]) {
        const double d = distance(pos[i], pos[best]);
        if (d < dist[i]) {
          dist[i] = d;
          link[i] = best;
        }
      }
  }
  return edges;
}

/// Recover node positions and the edge set from a generated network.
/// Node 0 is the root (first point of the first segment).
std::set<std::pair<int, int>> network_edges(const VesselNetwork &net,
                                            std::vector<Vec<3>> &pos) {
  auto id_of = [&](const Vec<3> &p) {
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (distance(pos[i], p) < 1e-14) return int(i);
    pos.push_back(p);
    return int(pos.size() - 1);
  };
  std::set<std::pair<int, int>> edges;
  for (const auto &seg : net.segments) {
    const int a = id_of(seg.points.front());
    const int b = id_of(seg.points.back());
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  return edges;
}

TreeConfig desk_tree_config(int n, double bf, std::uint64_t seed) {
  TreeConfig cfg;
  cfg.n_points = n;
  cfg.balancing_factor = bf;
  cfg.target_beta = 0.05;
  cfg.domain = {{0, 0, 0}, {1, 1, 1}};
  cfg.root = {0, 0, 0};
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("rng streams are deterministic and independent") {
  RngStream a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const double x = a.next_double();
    CHECK(x == b.next_double());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  // a different stream index decorrelates immediately
  RngStream a2(42, 0);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a2.next_u64() == c.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("sample_point_vessels: count, margin, spacing, determinism") {
  const Box<2> box{{0, 0}, {1, 1}};
  RngStream rng(7, 0);
  const double radius = 0.02, margin = 0.05;
  const auto vessels = sample_point_vessels(box, 40, radius, margin, rng, 2.5);
  REQUIRE(vessels.size() == 40);
  for (const auto &v : vessels) {
    CHECK(v.center[0] >= margin);
    CHECK(v.center[0] <= 1 - margin);
    CHECK(v.center[1] >= margin);
    CHECK(v.center[1] <= 1 - margin);
    CHECK(v.radius == radius);
    CHECK(v.pressure == 2.5);
  }
  for (std::size_t i = 0; i < vessels.size(); ++i)
    for (std::size_t j = i + 1; j < vessels.size(); ++j)
      CHECK(distance(vessels[i].center, vessels[j].center) >= 2 * radius);

  RngStream rng2(7, 0);
  const auto again = sample_point_vessels(box, 40, radius, margin, rng2, 2.5);
  for (std::size_t i = 0; i < vessels.size(); ++i)
    CHECK(distance(vessels[i].center, again[i].center) == 0.0);

  RngStream rng3(7, 0);
  const auto single = sample_point_vessels(box, 1, radius, margin, rng3);
  CHECK(single.size() == 1);

  RngStream rng4(7, 0);
  CHECK_THROWS_AS(sample_point_vessels(box, 40, radius, 0.01, rng4), std::invalid_argument);
  RngStream rng5(7, 0);
  CHECK_THROWS_AS(sample_point_vessels(box, 2000, 0.01, 0.01, rng5), std::invalid_argument);
}

TEST_CASE("packing rejection fires on impossible-but-guard-passing requests") {
  // 450 circles of radius 0.0188 pass the 0.5 area guard but cannot pack
  // into the margin-shrunk box at spacing 2r.
  const Box<2> box{{0, 0}, {1, 1}};
  RngStream rng(3, 0);
  CHECK_THROWS_WITH_AS(sample_point_vessels(box, 450, 0.0188, 0.35, rng),
                       "sample_point_vessels: packing too dense", std::runtime_error);
}

TEST_CASE("radius_for_beta closed form and round trip") {
  // Table values: L = 0.3839 m, V = 2.7e-8 m^3, beta = 0.05 -> a = 3.3455e-5 m
  const double a = radius_for_beta(0.3839, 2.7e-8, 0.05);
  CHECK(a == doctest::Approx(3.3455e-5).epsilon(0.005));
  CHECK(kPi * a * a * 0.3839 / 2.7e-8 == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(radius_for_beta(1.0, 1.0, 1e-12) < 1e-6);  // beta -> 0 gives a -> 0
  CHECK_THROWS_AS(radius_for_beta(0.0, 1.0, 0.05), std::invalid_argument);
}

TEST_CASE("build_tree: hand-enumerable chains and stars") {
  // bf = 0, root (0,0,0), points (1,0,0), (2,0,0): the chain beats the star
  {
    TreeConfig cfg = desk_tree_config(2, 0.0, 1);
    cfg.domain = {{0, 0, 0}, {3, 1, 1}};
    cfg.explicit_points = {{1, 0, 0}, {2, 0, 0}};
    RngStream rng(1, 0);
    const VesselNetwork net = build_tree(cfg, rng);
    REQUIRE(net.segments.size() == 2);
    CHECK(net.total_length() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(net.parent_segment[0] == -1);
    CHECK(net.parent_segment[1] == 0);  // p2 hangs off the p1 edge
    CHECK(distance(net.segments[1].points.front(), {1, 0, 0}) == 0.0);
  }
  // bf = 1, root (0,0,0), points (1,0,0), (1,1,0): p2 attaches to the root
  // (0 + sqrt(2) < 1 + 1)
  {
    TreeConfig cfg = desk_tree_config(2, 1.0, 1);
    cfg.domain = {{0, 0, 0}, {2, 2, 1}};
    cfg.explicit_points = {{1, 0, 0}, {1, 1, 0}};
    RngStream rng(1, 0);
    const VesselNetwork net = build_tree(cfg, rng);
    REQUIRE(net.segments.size() == 2);
    CHECK(net.parent_segment[0] == -1);
    CHECK(net.parent_segment[1] == -1);
    CHECK(net.total_length() == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
  }
  TreeConfig cfg = desk_tree_config(50, 0.0, 99);
  RngStream rng(99, 0);
  const VesselNetwork net = build_tree(cfg, rng);
  REQUIRE(net.segments.size() == 50);
  std::vector<Vec<3>> pos = {cfg.root};
  const auto edges = network_edges(net, pos);
  REQUIRE(pos.size() == 51);
  const auto mst = prim_mst(pos);
  CHECK(edges == mst);

  // bf = 1: every point attaches directly to the root
  TreeConfig star_cfg = desk_tree_config(30, 1.0, 5);
  RngStream rng2(5, 0);
  const VesselNetwork star = build_tree(star_cfg, rng2);
  for (const auto &seg : star.segments)
    CHECK(distance(seg.points.front(), star_cfg.root) == 0.0);
  for (int parent : star.parent_segment) CHECK(parent == -1);
}

TEST_CASE("tree validity: connected, acyclic, n edges; length dominates the MST") {
  TreeConfig cfg = desk_tree_config(40, 0.5, 123);
  RngStream rng(123, 0);
  const VesselNetwork net = build_tree(cfg, rng);
  REQUIRE(net.segments.size() == 40);
  REQUIRE(net.parent_segment.size() == 40);

  // structural: parent indices precede children (growth order), one root link
  // per connected component reachable from the root
  int roots = 0;
  for (std::size_t k = 0; k < net.parent_segment.size(); ++k) {
    CHECK(net.parent_segment[k] < int(k));
    if (net.parent_segment[k] == -1) ++roots;
    else {
      // child's first point is the parent's endpoint
      const auto &parent = net.segments[net.parent_segment[k]];
      CHECK(distance(net.segments[k].points.front(), parent.points.back()) == 0.0);
    }
  }
  CHECK(roots >= 1);

  // bf > 0 total length is bounded below by the MST length
  std::vector<Vec<3>> pos = {cfg.root};
  network_edges(net, pos);
  const auto mst = prim_mst(pos);
  double mst_len = 0;
  for (const auto &[i, j] : mst) mst_len += distance(pos[i], pos[j]);
  for (double bf : {0.25, 0.5, 0.75, 1.0}) {
    TreeConfig c2 = desk_tree_config(40, bf, 123);
    RngStream r2(123, 0);
    const VesselNetwork n2 = build_tree(c2, r2);  // same seed -> same points
    CHECK(n2.total_length() >= mst_len - 1e-12);
  }

  // radius follows the target volume fraction over the tree length
  const double expect_r = radius_for_beta(net.total_length(), 1.0, 0.05);
  CHECK(net.segments.front().radii.front() == doctest::Approx(expect_r).epsilon(1e-14));
}

TEST_CASE("identical tree configs produce byte-identical interchange files") {
  TreeConfig cfg = desk_tree_config(25, 0.5, 2024);
  RngStream r1(2024, 0), r2(2024, 0);
  const VesselNetwork n1 = build_tree(cfg, r1);
  const VesselNetwork n2 = build_tree(cfg, r2);
  std::ostringstream s1, s2;
  write_network(n1, s1);
  write_network(n2, s2);
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().substr(0, 9) == "SEGMENT 2");
}

TEST_CASE("aligned 3D vessel sampling") {
  const Box<3> box{{0, 0, 0}, {1, 1, 1}};
  RngStream rng(31, 0);
  const double radius = 0.012, margin = 0.08;
  const VesselNetwork net = sample_aligned_vessels(box, 30, radius, margin, rng, 1.0);
  REQUIRE(net.segments.size() == 30);
  for (const auto &s : net.segments) {
    CHECK(s.points[0][2] == doctest::Approx(margin).epsilon(1e-15));
    CHECK(s.points[1][2] == doctest::Approx(1 - margin).epsilon(1e-15));
    CHECK(s.points[0][0] == s.points[1][0]);
    CHECK(s.points[0][1] == s.points[1][1]);
    CHECK(s.points[0][0] >= margin);
    CHECK(s.points[0][0] <= 1 - margin);
  }
  for (std::size_t i = 0; i < net.segments.size(); ++i)
    for (std::size_t j = i + 1; j < net.segments.size(); ++j) {
      const Vec<2> a{net.segments[i].points[0][0], net.segments[i].points[0][1]};
      const Vec<2> b{net.segments[j].points[0][0], net.segments[j].points[0][1]};
      CHECK(distance(a, b) >= 2 * radius);
    }
}
