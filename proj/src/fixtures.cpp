#include "resavg/fixtures.hpp"

#include <cmath>

#include "resavg/lattice.hpp"

namespace resavg {

Series quadratic_h(int n) {
  check_dim(n);
  Series h(n, true);
  YPoly p;
  VectorXi deg = VectorXi::Zero(n);
  for (int i = 0; i < n; ++i) {
    deg[i] = 2;
    p.add_term(YPoly::pack(deg), 0.5);
    deg[i] = 0;
  }
  h.set_coeff(VectorXi::Zero(n), p);
  return h;
}

Series esempietto_potential(int n, double s, double delta, int cutoff) {
  Series f(n, true);
  for (const VectorXi& k : generators_up_to(n, cutoff)) {
    double c = delta * std::pow(double(k.lpNorm<1>()), -n) * std::exp(-k.lpNorm<1>() * s);
    f.set_coeff(k, cplx(c, 0));
    f.set_coeff(VectorXi(-k), cplx(c, 0));
  }
  return f;
}

}  // namespace resavg
