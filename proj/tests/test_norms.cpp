// Norm computations and the analytic estimates tying them together.
// Closed-form oracles: single cosine modes, the explicit generator-cosine
// potential, and hand-derived tail/derivative bounds.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resavg/fixtures.hpp"
#include "resavg/lattice.hpp"
#include "resavg/norms.hpp"

using namespace resavg;
using resavg::testing::random_real_series;

namespace {

Series cosine(int n, const VectorXi& k, double amp = 1.0) {
  Series f(n, true);
  f.set_coeff(k, cplx(amp / 2, 0));
  f.set_coeff(VectorXi(-k), cplx(amp / 2, 0));
  return f;
}

VectorXi mode2(int a, int b) {
  VectorXi k(2);
  k << a, b;
  return k;
}

Domain dom2(double R, double r, double s) {
  return Domain::ball(VectorXd::Zero(2), R, r, s);
}

}  // namespace

TEST_CASE("fourier norms: closed forms") {
  Domain d = dom2(0.5, 0.1, 1.0);
  Series c1 = cosine(2, mode2(1, 0));
  CHECK(fourier_norm_inf(c1, d).value == doctest::Approx(0.5 * M_E).epsilon(1e-14));
  CHECK(fourier_norm_l1(c1, d).value == doctest::Approx(M_E).epsilon(1e-14));

  Series e11(2, false);
  e11.set_coeff(mode2(1, 1), cplx(1, 0));
  Domain dh = dom2(0.5, 0.1, 0.5);
  CHECK(fourier_norm_inf(e11, dh).value == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

  Series zero(2, true);
  CHECK(fourier_norm_l1(zero, d).value == 0.0);

  Domain d0 = dom2(0.5, 0.1, 0.0);
  Series two = series_add(cosine(2, mode2(1, 0)), cosine(2, mode2(0, 1)));
  CHECK(fourier_norm_l1(two, d0).value == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(fourier_norm_inf(c1, d).rigor == Rigor::upperBound);
  CHECK(fourier_norm_inf(c1, d).kind == NormKind::ellInfFourier);
}

TEST_CASE("fourier norms: generator-cosine potential hits its design values") {
  double s = 0.75, delta = 0.3;
  Series f = esempietto_potential(2, s, delta, 6);
  Domain d = dom2(0.4, 0.1, s);
  // every generator coefficient contributes delta |k|^{-n}, max at |k|_1 = 1
  CHECK(fourier_norm_inf(f, d).value == doctest::Approx(delta).epsilon(1e-12));
  // the l1 norm is delta times the sum of |k|_1^{-2} over generators
  double sum = 0;
  for (const VectorXi& k : generators_up_to(2, 6))
    sum += 2 * std::pow(double(k.lpNorm<1>()), -2.0);
  CHECK(fourier_norm_l1(f, d).value == doctest::Approx(delta * sum).epsilon(1e-12));
}

TEST_CASE("sup norm sampling: deterministic, bounded, and sharp enough") {
  Domain d1 = Domain::ball(VectorXd::Zero(1), 0.2, 0.1, 0.8);
  VectorXi one(1);
  one << 1;
  Series c = cosine(1, one);
  double a = sup_norm_sampled(c, d1).value;
  double b = sup_norm_sampled(c, d1).value;
  CHECK(a == b);  // fixed grid
  // true sup over the strip is cosh(s); the grid should get close from below
  CHECK(a <= std::cosh(0.8) * (1 + 1e-12));
  CHECK(a >= 0.8 * std::cosh(0.8));
  CHECK(sup_norm_sampled(c, d1).rigor == Rigor::sampledEstimate);

  // constant series: every sample evaluates to the constant
  Series k(1, true);
  k.set_coeff(VectorXi::Zero(1), cplx(2.5, 0));
  CHECK(sup_norm_sampled(k, d1).value == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("norm comparison chain") {
  Domain d = dom2(0.4, 0.1, 0.5);
  CHECK(norm_comparison_check(cosine(2, mode2(1, 0)), d, 0.5));
  CHECK(norm_comparison_check(Series(2, true), d, 0.5));

  // the closed-form values behind the single-mode case
  std::vector<CheckResult> cs;
  norm_comparison_check(cosine(2, mode2(1, 0)), d, 0.5, &cs);
  REQUIRE(cs.size() == 3);
  CHECK(cs[1].lhs == doctest::Approx(0.5 * std::exp(0.5)));  // linf
  CHECK(cs[1].rhs == doctest::Approx(std::exp(0.5)));        // l1
  CHECK(cs[2].rhs ==
        doctest::Approx(std::pow(8.0, 2) * 0.5 * std::exp(1.0)).epsilon(1e-12));

  for (int t = 0; t < 100; ++t) {
    Series f = random_real_series(2, 4, 2, 0.6, 1000 + t);
    CHECK(norm_comparison_check(f, d, 0.3 + 0.01 * t));
  }
}

TEST_CASE("tail bound: closed form and random property") {
  // f = cos(x1+x2), N = 1, s = 1, sigma = 0.5: both sides equal e
  Domain d = dom2(0.4, 0.1, 1.0);
  CheckResult c = tail_bound_check(cosine(2, mode2(1, 1)), d, 1, 0.5);
  CHECK(c.lhs == doctest::Approx(M_E).epsilon(1e-13));
  CHECK(c.rhs == doctest::Approx(M_E).epsilon(1e-13));
  CHECK(c.pass);

  SplitMix64 rng(77);
  for (int t = 0; t < 30; ++t) {
    Series f = random_real_series(2, 5, 2, 0.2, 2000 + t);
    int N = 1 + int(rng.next_double() * 4);
    double sigma = rng.uniform(0.1, 0.9);
    CHECK(tail_bound_check(f, d, N, sigma).pass);
  }
}

TEST_CASE("derivative estimates") {
  Domain d = dom2(0.4, 0.2, 1.0);
  // single mode: sum_i l1(d_{x_i} f) = 1 * e^{s-sigma}, bound e^s/(e sigma);
  // equality of the mode weight bound at sigma = 1
  Series c = cosine(2, mode2(1, 0));
  std::vector<CheckResult> cs;
  CHECK(cauchy_estimate_check(c, d, 0.1, 0.999999, &cs));
  CHECK(cs[0].lhs == doctest::Approx(std::exp(1.0 - 0.999999)).epsilon(1e-12));

  CHECK(cauchy_estimate_check(Series(2, true), d, 0.1, 0.5));

  for (int t = 0; t < 25; ++t) {
    Series f = random_real_series(2, 4, 3, 0.4, 3000 + t);
    SplitMix64 rng(t);
    CHECK(cauchy_estimate_check(f, d, rng.uniform(0.02, 0.18), rng.uniform(0.1, 0.9)));
  }
}

TEST_CASE("bracket norm estimate") {
  Domain d = dom2(0.4, 0.2, 0.8);

  // h quadratic, phi a single mode: both sides in closed form
  Series h = quadratic_h(2);
  Series phi(2, false);
  phi.set_coeff(mode2(1, 0), cplx(1, 0));
  std::vector<CheckResult> cs;
  CHECK(bracket_norm_bound_check(h, phi, d, d, 0.1, 0.3, &cs));
  // {h, phi} = -i y1 e^{i x1}; bound of |y1| on |y| <= R + r - rho is R + r - rho
  CHECK(cs[0].lhs == doctest::Approx((0.4 + 0.2 - 0.1) * std::exp(0.5)).epsilon(1e-12));

  // constant f: zero bracket
  Series k(2, true);
  k.set_coeff(VectorXi::Zero(2), cplx(3, 0));
  CHECK(bracket_norm_bound_check(k, phi, d, d, 0.1, 0.3));

  for (int t = 0; t < 3; ++t) {
    Series f = random_real_series(2, 3, 2, 0.5, 4000 + t);
    Series g = random_real_series(2, 3, 2, 0.5, 5000 + t);
    Domain df = dom2(0.4, 0.25, 0.9);
    Domain dg = dom2(0.4, 0.2, 0.8);
    CHECK(bracket_norm_bound_check(f, g, df, dg, 0.05, 0.2));
  }
}

TEST_CASE("norm monotonicity under projection and truncation") {
  Domain d = dom2(0.4, 0.1, 0.5);
  for (int t = 0; t < 10; ++t) {
    Series f = random_real_series(2, 5, 2, 0.3, 6000 + t);
    double full = fourier_norm_l1(f, d).value;
    CHECK(fourier_norm_l1(truncate(f, 3), d).value <= full * (1 + 1e-12));
    CHECK(fourier_norm_l1(project_lattice(f, LatticeSpec::line(mode2(1, 1))), d).value <=
          full * (1 + 1e-12));
    CHECK(fourier_norm_inf(truncate_complement(f, 2), d).value <=
          fourier_norm_inf(f, d).value * (1 + 1e-12));

    // one-angle projection: width |k|_1 s on the line matches width s upstairs
    VectorXi k = mode2(1, -1);
    Series fk = one_d_projection(f, k);
    Domain dk = d;
    dk.s = k.lpNorm<1>() * d.s;
    CHECK(fourier_norm_l1(fk, dk).value <= full * (1 + 1e-12));
  }
}
