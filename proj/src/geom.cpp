#include "vtfem/geom.hpp"

#include <stdexcept>

namespace vtfem {

namespace {

// Gauss-Legendre abscissae on [-1,1], mapped to [0,1] below.
const double g2 = 0.57735026918962576451;   // 1/sqrt(3)
const double g3 = 0.77459666924148337704;   // sqrt(3/5)
const double g4a = 0.33998104358485626480;
const double g4b = 0.86113631159405257522;
const double w4a = 0.65214515486254614263;
const double w4b = 0.34785484513745385737;
const double g5a = 0.53846931010568309104;
const double g5b = 0.90617984593866399280;
const double w5a = 0.47862867049936646804;
const double w5b = 0.23692688505618908751;
const double w5c = 0.56888888888888888889;
const double g6a = 0.23861918608319690863;
const double g6b = 0.66120938646626451366;
const double g6c = 0.93246951420315202781;
const double w6a = 0.46791393457269104739;
const double w6b = 0.36076157304813860757;
const double w6c = 0.17132449237917034504;

GaussRule make_rule(int n) {
  GaussRule r;
  std::vector<double> x, w;
  switch (n) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: x = {-g2, g2}; w = {1.0, 1.0}; break;
    case 3: x = {-g3, 0.0, g3}; w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}; break;
    case 4: x = {-g4b, -g4a, g4a, g4b}; w = {w4b, w4a, w4a, w4b}; break;
    case 5: x = {-g5b, -g5a, 0.0, g5a, g5b}; w = {w5b, w5a, w5c, w5a, w5b}; break;
    case 6: x = {-g6c, -g6b, -g6a, g6a, g6b, g6c}; w = {w6c, w6b, w6a, w6a, w6b, w6c}; break;
    default: throw std::invalid_argument("gauss_rule: order must be 1..6");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.points.push_back(0.5 * (x[i] + 1.0));
    r.weights.push_back(0.5 * w[i]);
  }
  return r;
}

}  // namespace

const GaussRule &gauss_rule(int n) {
  static const GaussRule rules[6] = {make_rule(1), make_rule(2), make_rule(3),
                                     make_rule(4), make_rule(5), make_rule(6)};
  if (n < 1 || n > 6) throw std::invalid_argument("gauss_rule: order must be 1..6");
  return rules[n - 1];
}

}  // namespace vtfem
