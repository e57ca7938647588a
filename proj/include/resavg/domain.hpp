#ifndef RESAVG_DOMAIN_HPP
#define RESAVG_DOMAIN_HPP

// Analyticity domains and tagged norm values. A domain is a union of real
// balls widened by r in the action variable and a strip of half-width s in
// the angles. Upper bounds are evaluated on the enclosing complex balls
// |y - c| <= R + r, which contain the true r-neighborhood, so every
// upperBound produced here is sound for the exact domain.

#include <cmath>
#include <string>
#include <vector>

#include "types.hpp"

namespace resavg {

struct Ball {
  VectorXd c;
  double R = 0;
};

struct Domain {
  std::vector<Ball> balls;
  double r = 0;  // complex widening of the action domain
  double s = 0;  // angular strip half-width

  int dim() const { return balls.empty() ? 0 : int(balls[0].c.size()); }

  Domain shrunk(double dr, double ds) const {
    if (dr > r + 1e-300 || ds > s + 1e-300)
      throw std::invalid_argument("Domain::shrunk: widths would go negative");
    Domain d = *this;
    d.r = r - dr;
    d.s = s - ds;
    return d;
  }

  static Domain ball(const VectorXd& c, double R, double r, double s) {
    return Domain{{Ball{c, R}}, r, s};
  }
};

enum class NormKind { sup, ellInfFourier, ellOneFourier };
enum class Rigor { upperBound, sampledEstimate };

struct NormValue {
  double value = 0;
  NormKind kind = NormKind::ellOneFourier;
  Rigor rigor = Rigor::upperBound;
};

// one verified inequality: lhs <= rhs, with like-for-like rigor; relSlack
// only loosens the pass rule (float rounding), lhs/rhs stay as computed
struct CheckResult {
  std::string name;
  double lhs = 0, rhs = 0;
  bool pass = false;
};

inline CheckResult make_check(const std::string& name, double lhs, double rhs,
                              double relSlack = 0) {
  return CheckResult{name, lhs, rhs, lhs <= rhs + relSlack * std::abs(rhs)};
}

}  // namespace resavg

#endif
