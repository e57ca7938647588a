// Averaging engine tests: the flat/low split, the homological solve against
// its closed-form inverse, Lie transforms against an RK4 flow oracle, single
// steps and the iterated normal form on a rotator + cosine fixture (checked
// pointwise through the composed change of variables), and the zone-level
// wrappers with the sqrt(eps)-calibrated parameters.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "helpers.hpp"
#include "resavg/fixtures.hpp"
#include "resavg/normal_form.hpp"
#include "resavg/norms.hpp"
#include "resavg/rng.hpp"

using namespace resavg;
using doctest::Approx;
using resavg::testing::random_real_series;
using resavg::testing::series_equal_exact;

namespace {

VectorXi vec2(int a, int b) {
  VectorXi k(2);
  k << a, b;
  return k;
}

VectorXd pt2(double a, double b) {
  VectorXd y(2);
  y << a, b;
  return y;
}

Series cosine(const VectorXi& m, double amp) {
  Series f(int(m.size()), true);
  f.set_coeff(m, cplx(amp / 2, 0));
  f.set_coeff(VectorXi(-m), cplx(amp / 2, 0));
  return f;
}

Series sine(const VectorXi& m, double amp) {
  Series f(int(m.size()), true);
  f.set_coeff(m, cplx(0, -amp / 2));
  f.set_coeff(VectorXi(-m), cplx(0, amp / 2));
  return f;
}

// eps (cos x1 + cos(x1 + x2)): one resonant and one removable harmonic
Series pendulum_f(double eps) {
  return series_add(cosine(vec2(1, 0), eps), cosine(vec2(1, 1), eps));
}

double eval_real(const Series& F, const PhasePoint& p) {
  VectorXcd y = p.y.cast<cplx>();
  VectorXd zero = VectorXd::Zero(p.x.size());
  return F.evaluate(y, p.x, zero).real();
}

void check_all(const std::vector<CheckResult>& cs) {
  for (const CheckResult& c : cs) {
    INFO(c.name << ": lhs=" << c.lhs << " rhs=" << c.rhs);
    CHECK(c.pass);
  }
}

}  // namespace

TEST_CASE("split routes lattice, low and high modes") {
  LatticeSpec lam = LatticeSpec::line(vec2(1, 0));

  FlatSplit a = split_flat(cosine(vec2(1, 0), 1.0), lam, 2);
  CHECK(a.fK.empty());
  CHECK(series_equal_exact(a.fFlat, cosine(vec2(1, 0), 1.0)));

  FlatSplit b = split_flat(cosine(vec2(0, 1), 1.0), lam, 2);
  CHECK(b.fFlat.empty());
  CHECK(series_equal_exact(b.fK, cosine(vec2(0, 1), 1.0)));

  FlatSplit c = split_flat(cosine(vec2(0, 3), 1.0), lam, 2);
  CHECK(c.fK.empty());
  CHECK(series_equal_exact(c.fFlat, cosine(vec2(0, 3), 1.0)));

  for (std::uint64_t seed : {101u, 202u}) {
    Series f = random_real_series(2, 4, 2, 0.3, seed);
    for (const LatticeSpec& l : {LatticeSpec::zero(), lam}) {
      FlatSplit sp = split_flat(f, l, 3);
      CHECK(series_equal_exact(series_add(sp.fFlat, sp.fK), f));
      for (ModeKey m : sp.fK.sorted_modes()) {
        CHECK(!l.contains(m, 2));
        CHECK(mode_l1(m, 2) >= 1);
        CHECK(mode_l1(m, 2) <= 3);
      }
      for (ModeKey m : sp.fFlat.sorted_modes())
        CHECK((l.contains(m, 2) || mode_l1(m, 2) > 3));
    }
  }
}

TEST_CASE("homological solve matches the closed-form inverse") {
  Series h = quadratic_h(2);
  Series fK = cosine(vec2(1, 0), 1.0);
  Domain dom = Domain::ball(pt2(1, 0), 0.05, 0.1, 0.5);
  StepParams p{LatticeSpec::zero(), 2, 0.8, 0.02, 0.1, dom};

  Series phi = solve_homological(h, fK, p);
  // {h, phi} + cos x1 = 0 has the explicit solution phi = sin(x1) / y1
  VectorXcd y(2);
  y << cplx(1, 0), cplx(0, 0);
  VectorXd xr = pt2(0.7, 0.0), xi = VectorXd::Zero(2);
  cplx v = phi.evaluate(y, xr, xi);
  CHECK(v.real() == Approx(std::sin(0.7)).epsilon(1e-12));
  CHECK(std::abs(v.imag()) < 1e-14);
  y << cplx(1.05, 0), cplx(0, 0);
  CHECK(phi.evaluate(y, xr, xi).real() ==
        Approx(std::sin(0.7) / 1.05).epsilon(1e-12));

  CHECK(homological_residual(h, phi, fK, dom) < 1e-12);

  double l1phi = fourier_norm_l1(phi, dom).value;
  double l1fK = fourier_norm_l1(fK, dom).value;
  CHECK(l1phi <= l1fK / 0.8 * (1 + 1e-12));
  // mode bound: (1/2) / min|y1| * e^{s} per mode, min|y1| = 1 - 0.15
  CHECK(l1phi == Approx(std::exp(0.5) / 0.85));
}

TEST_CASE("homological solve rejects bad inputs") {
  Series h = quadratic_h(2);
  Domain dom = Domain::ball(pt2(1, 0), 0.05, 0.1, 0.5);
  StepParams p{LatticeSpec::zero(), 2, 0.8, 0.02, 0.1, dom};

  // divisor y1 collapses near the origin
  Domain origin = Domain::ball(pt2(0.1, 0), 0.05, 0.1, 0.5);
  StepParams p0{LatticeSpec::zero(), 2, 0.8, 0.02, 0.1, origin};
  CHECK_THROWS_AS(solve_homological(h, cosine(vec2(1, 0), 1.0), p0),
                  DivisorTooSmall);

  Series avg(2, true);
  avg.set_coeff(VectorXi::Zero(2), cplx(1, 0));
  CHECK_THROWS_AS(solve_homological(h, avg, p), std::invalid_argument);

  StepParams pl{LatticeSpec::line(vec2(1, 0)), 2, 0.8, 0.02, 0.1, dom};
  CHECK_THROWS_AS(solve_homological(h, cosine(vec2(1, 0), 1.0), pl),
                  std::invalid_argument);

  CHECK_THROWS_AS(solve_homological(h, cosine(vec2(3, 0), 1.0), p),
                  std::invalid_argument);

  CHECK(solve_homological(h, Series(2, true), p).empty());

  StepParams badK{LatticeSpec::zero(), 1, 0.8, 0.02, 0.1, dom};
  CHECK_THROWS_AS(badK.validate(2), std::invalid_argument);
  StepParams badRho{LatticeSpec::zero(), 2, 0.8, 0.2, 0.1, dom};
  CHECK_THROWS_AS(badRho.validate(2), std::invalid_argument);
  StepParams badLine{LatticeSpec::line(vec2(2, 0)), 2, 0.8, 0.02, 0.1, dom};
  CHECK_THROWS_AS(badLine.validate(2), std::invalid_argument);
}

TEST_CASE("generator bound holds on random low parts") {
  Series h = quadratic_h(2);
  Domain dom = Domain::ball(pt2(5, 7), 0.05, 0.1, 0.4);
  StepParams p{LatticeSpec::zero(), 3, 1.5, 0.02, 0.1, dom};
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    Series f = random_real_series(2, 3, 2, 0.4, seed);
    Series fK = split_flat(f, LatticeSpec::zero(), 3).fK;
    REQUIRE(!fK.empty());
    Series phi = solve_homological(h, fK, p);
    double l1fK = fourier_norm_l1(fK, dom).value;
    CHECK(fourier_norm_l1(phi, dom).value <= l1fK / 1.5 * (1 + 1e-12));
    CHECK(homological_residual(h, phi, fK, dom) <= 1e-9 * l1fK);
  }
}

TEST_CASE("lie transform: identity, orders, flow oracle, contraction") {
  Series h = quadratic_h(2);
  Domain dom = Domain::ball(pt2(1, 0), 0.05, 0.1, 0.5);
  StepParams p{LatticeSpec::zero(), 2, 0.8, 0.08, 0.4, dom};

  // empty generator: exact identity
  CHECK(series_equal_exact(lie_transform(h, Series(2, true), p), h));

  const double eps = 1e-3;
  Series phi = solve_homological(h, cosine(vec2(1, 0), eps), p);

  LieResult fixed = lie_transform_ex(h, phi, p, 3);
  CHECK(fixed.order == 3);

  LieResult lr = lie_transform_ex(h, phi, p, -1, 1e-9);
  CHECK(lr.theta > 0.5);
  CHECK(lr.theta < 1.0);
  double l1h = fourier_norm_l1(h, dom).value;
  CHECK(lr.tailBound <= 1e-9 * l1h * (1 + 1e-12));
  CHECK(lr.order >= 5);
  CHECK(lr.order <= 20);

  // truncated series vs. the numerically integrated time-1 flow
  SplitMix64 rng(77);
  for (int i = 0; i < 10; ++i) {
    VectorXd y = pt2(1 + 0.04 * (rng.next_double() - 0.5),
                     0.04 * (rng.next_double() - 0.5));
    VectorXd x =
        pt2(2 * M_PI * rng.next_double(), 2 * M_PI * rng.next_double());
    PhasePoint q = hamiltonian_flow(phi, {y, x}, 1.0, 1000);
    double href = eval_real(h, q);
    double hlie = eval_real(lr.value, {y, x});
    CHECK(std::abs(href - hlie) < 1e-8);
  }

  Series diff = series_add(lr.value, h, -1.0);
  CHECK(fourier_norm_l1(diff, dom.shrunk(0.08, 0.4)).value <=
        2 * lr.theta * l1h * (1 + 1e-12));

  // failure modes: theta over 1, and an unreachable tail tolerance
  StepParams tiny{LatticeSpec::zero(), 2, 0.8, 0.001, 0.001, dom};
  CHECK_THROWS_AS(lie_transform(h, phi, tiny), SmallnessViolated);
  CHECK_THROWS_AS(lie_transform_ex(h, phi, p, -1, 1e-30), SmallnessViolated);
}

TEST_CASE("averaging step on the pendulum fixture") {
  Series h = quadratic_h(2);
  const double eps = 1e-5;
  Series f = pendulum_f(eps);
  Domain dom = Domain::ball(pt2(0, 20), 0.05, 2.0, 0.5);
  StepParams p{LatticeSpec::line(vec2(1, 0)), 6, 9.0, 0.5, 0.5 / 12.0, dom};

  AveragingStep st = averaging_step(h, f, p);
  CHECK(st.fK.num_modes() == 2);
  CHECK(st.theta ==
        Approx(4 * M_E * eps * std::exp(1.0) / (9.0 * 0.5 * (0.5 / 12.0))));
  check_all(st.checks);

  SplitMix64 rng(13);
  for (int i = 0; i < 3; ++i) {
    PhasePoint p0{pt2(0.04 * (rng.next_double() - 0.5),
                      20 + 0.04 * (rng.next_double() - 0.5)),
                  pt2(2 * M_PI * rng.next_double(),
                      2 * M_PI * rng.next_double())};
    PhasePoint q = hamiltonian_flow(st.phi, p0, 1.0, 300);
    double lhs = eval_real(h, q) + eval_real(f, q);
    double rhs = eval_real(h, p0) + eval_real(st.fPlus, p0);
    CHECK(std::abs(lhs - rhs) < 1e-10);
    CHECK((q.y - p0.y).lpNorm<1>() <= st.dispY * (1 + 1e-9));
    CHECK((q.x - p0.x).lpNorm<Eigen::Infinity>() <= st.dispX * (1 + 1e-9));
  }

  // the generator is linear in the perturbation
  AveragingStep st10 = averaging_step(h, pendulum_f(10 * eps), p);
  PhasePoint pp{pt2(0.0, 20.0), pt2(0.7, 0.2)};
  CHECK(eval_real(st10.phi, pp) ==
        Approx(10 * eval_real(st.phi, pp)).epsilon(1e-12));

  // fully resonant input passes through untouched
  Series f2 = cosine(vec2(1, 0), eps);
  AveragingStep st2 = averaging_step(h, f2, p);
  CHECK(st2.fK.empty());
  CHECK(st2.phi.empty());
  CHECK(st2.fStar.empty());
  CHECK(st2.theta == 0.0);
  CHECK(series_equal_exact(st2.fPlus, f2));
}

TEST_CASE("normal form: resonant input is a fixed point") {
  Series h = quadratic_h(2);
  Series f = cosine(vec2(1, 0), 1e-5);
  Domain dom = Domain::ball(pt2(0, 20), 0.05, 2.0, 0.5);
  NormalFormResult nf =
      normal_form(h, f, LatticeSpec::line(vec2(1, 0)), 6, dom, 9.0);

  REQUIRE(nf.generators.size() == 7);
  for (const Series& g : nf.generators) CHECK(g.empty());
  CHECK(series_equal_exact(nf.g, f));
  CHECK(nf.fStarStar.empty());
  CHECK(nf.fStar.empty());
  CHECK(nf.dispY == 0.0);
  CHECK(nf.dispX == 0.0);
  REQUIRE(nf.ledger.thetaSeq.size() == 7);
  for (double th : nf.ledger.thetaSeq) CHECK(th == 0.0);
  check_all(nf.checks);
}

TEST_CASE("normal form: full pendulum run, ledger, transformation oracle") {
  Series h = quadratic_h(2);
  Series f = pendulum_f(1e-5);
  Domain dom = Domain::ball(pt2(0, 20), 0.05, 2.0, 0.5);
  LatticeSpec lam = LatticeSpec::line(vec2(1, 0));
  NormalFormResult nf = normal_form(h, f, lam, 6, dom, 9.0);

  const double l1f = 1e-5 * (std::exp(0.5) + std::exp(1.0));
  CHECK(nf.ledger.thetaStar == Approx(2048.0 * 36 * l1f / (9.0 * 2.0 * 0.5)));
  CHECK(nf.ledger.thetaStar < 1.0);
  REQUIRE(nf.steps.size() == 7);
  REQUIRE(nf.generators.size() == 7);
  REQUIRE(nf.ledger.thetaSeq.size() == 7);
  CHECK(nf.steps[0].index == -1);
  CHECK(nf.domainOut.r == Approx(1.0));
  CHECK(nf.domainOut.s == Approx(0.5 * (1 - 1.0 / 6)));
  check_all(nf.checks);

  // the composed change of variables conjugates H to h + fFinal
  SplitMix64 rng(5);
  for (int i = 0; i < 5; ++i) {
    PhasePoint p0{pt2(0.04 * (rng.next_double() - 0.5),
                      20 + 0.04 * (rng.next_double() - 0.5)),
                  pt2(2 * M_PI * rng.next_double(),
                      2 * M_PI * rng.next_double())};
    PhasePoint q = apply_transformation(nf.generators, p0, 300);
    double lhs = eval_real(h, q) + eval_real(f, q);
    double rhs = eval_real(h, p0) + eval_real(nf.fFinal, p0);
    CHECK(std::abs(lhs - rhs) < 1e-7 * std::abs(lhs));
  }

  // reports: deterministic, parseable, one csv row per step
  NormalFormResult nf2 = normal_form(h, f, lam, 6, dom, 9.0);
  std::string js = normal_form_json(nf);
  CHECK(js == normal_form_json(nf2));
  auto j = nlohmann::json::parse(js);
  CHECK(j["K"] == 6);
  CHECK(j["lattice"] == "line (1,0)");
  CHECK(j["steps"].size() == 7);
  CHECK(j["thetaLedger"]["thetaSeq"].size() == 7);
  CHECK(j["checks"].size() == nf.checks.size());

  std::ostringstream cs;
  step_norms_csv(cs, nf);
  std::string csv = cs.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  CHECK(csv.rfind("step,r,s,theta,", 0) == 0);
}

TEST_CASE("normal form: smallness gate throws near the origin") {
  Series h = quadratic_h(2);
  Domain dom = Domain::ball(pt2(0, 0.8), 0.02, 0.08, 0.5);
  try {
    normal_form(h, pendulum_f(1e-5), LatticeSpec::line(vec2(1, 0)), 6, dom,
                0.25);
    FAIL("expected SmallnessViolated");
  } catch (const SmallnessViolated& e) {
    CHECK(e.theta > 1.0);
  }
}

TEST_CASE("normal form: near-origin run at reduced eps") {
  Series h = quadratic_h(2);
  Domain dom = Domain::ball(pt2(0, 0.8), 0.02, 0.08, 0.5);
  NormalFormResult nf = normal_form(h, pendulum_f(1e-8),
                                    LatticeSpec::line(vec2(1, 0)), 6, dom, 0.25);
  CHECK(nf.ledger.thetaStar == Approx(0.322).epsilon(1e-2));
  check_all(nf.checks);
}

TEST_CASE("zone averaging on a fully non-resonant ball") {
  Series h = quadratic_h(2);
  Series f = series_add(series_add(cosine(vec2(1, 0), 1.0),
                                   cosine(vec2(1, 1), 0.5)),
                        sine(vec2(0, 1), 0.25));
  CoveringParams cp;
  cp.K1 = 2;
  cp.K2 = 6;
  cp.nu = 7;
  cp.L = 1;
  cp.Lbar = 1;
  cp.M = 3;
  cp.epsilon = 1e-14;
  cp.alpha = std::sqrt(cp.epsilon) * std::pow(6.0, 7);
  std::vector<VectorXd> centers{pt2(1.0, 1.4142)};

  ZoneAveraging za = averaging_nonresonant(h, f, 1e-14, cp, centers, 2.0, 1.0);
  CHECK(za.hypothesesMet);
  check_all(za.hypothesisChecks);
  check_all(za.checks);
  CHECK(za.rCore == Approx(cp.alpha / 8));
  CHECK(za.alphaEff == Approx(cp.alpha / 4));
  CHECK(za.core.K == 2);
  CHECK(za.thetaBound == Approx(262144.0 / 279936.0));

  // a resonant center is rejected
  CHECK_THROWS_AS(
      averaging_nonresonant(h, f, 1e-14, cp, {pt2(0.0, 1.0)}, 2.0, 1.0),
      CoveringGap);

  // a perturbation with only high harmonics has an empty average
  ZoneAveraging zh =
      averaging_nonresonant(h, cosine(vec2(4, 3), 1.0), 1e-14, cp, centers,
                            2.0, 1.0);
  CHECK(zh.g.empty());
  check_all(zh.checks);
}

TEST_CASE("zone averaging at a simple resonance") {
  Series h = quadratic_h(2);
  Series f = series_add(series_add(cosine(vec2(1, 0), 1.0),
                                   cosine(vec2(1, 1), 0.5)),
                        sine(vec2(0, 1), 0.25));
  CoveringParams cp;
  cp.K1 = 2;
  cp.K2 = 6;
  cp.nu = 7;
  cp.L = 1;
  cp.Lbar = 1;
  cp.M = 3;
  cp.epsilon = 1e-14;
  cp.alpha = std::sqrt(cp.epsilon) * std::pow(6.0, 7);
  VectorXi k = vec2(1, 0);
  std::vector<VectorXd> centers{pt2(0.0, 1.0)};

  ZoneAveraging za =
      averaging_at_simple_resonance(h, f, 1e-14, k, cp, centers, 2.0, 1.0);
  CHECK(za.hypothesesMet);
  check_all(za.hypothesisChecks);
  check_all(za.checks);
  CHECK(za.rCore == Approx(cp.alpha));
  CHECK(za.alphaEff == Approx(cp.alpha * 6));
  CHECK(za.core.K == 6);
  CHECK(za.core.lattice.kind == LatticeSpec::Line);

  // the resonant harmonic survives in g
  PhasePoint pp{pt2(0.0, 1.0), pt2(0.3, 0.0)};
  CHECK(eval_real(za.g, pp) == Approx(std::cos(0.3)).epsilon(1e-4));

  // a perturbation supported on the resonance line is untouched
  ZoneAveraging zr = averaging_at_simple_resonance(
      h, cosine(vec2(1, 0), 1.0), 1e-14, k, cp, centers, 2.0, 1.0);
  CHECK(zr.fStarStar.empty());
  CHECK(zr.g.num_modes() == 2);
  CHECK(eval_real(zr.g, pp) == Approx(std::cos(0.3)).epsilon(1e-12));
  check_all(zr.checks);

  // a non-resonant center is rejected
  CHECK_THROWS_AS(averaging_at_simple_resonance(h, f, 1e-14, k, cp,
                                                {pt2(1.0, 1.4142)}, 2.0, 1.0),
                  CoveringGap);
}
