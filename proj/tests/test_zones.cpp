#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "resavg/fixtures.hpp"
#include "resavg/lattice.hpp"
#include "resavg/rng.hpp"
#include "resavg/zones.hpp"

using namespace resavg;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

VectorXi ivec2(int a, int b) {
  VectorXi v(2);
  v << a, b;
  return v;
}

CoveringParams params(double alpha, int K1, int K2, double M) {
  CoveringParams p;
  p.alpha = alpha;
  p.K1 = K1;
  p.K2 = K2;
  p.M = M;
  p.L = 1;
  p.Lbar = 1;
  p.nu = 4;
  p.epsilon = alpha * alpha;  // not driving anything here
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  CoveringParams p = params(0.05, 3, 9, 3);
  CHECK_NOTHROW(p.validate());
  CHECK_NOTHROW(p.validate(true));  // 9 = 3*3

  CoveringParams bad = p;
  bad.K1 = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.K2 = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.alpha = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.K2 = 8;  // >= K1 but < 3*K1
  CHECK_NOTHROW(bad.validate());
  CHECK_THROWS_AS(bad.validate(true), std::invalid_argument);
}

TEST_CASE("frequency map of quadratic and affine integrable parts") {
  Series h = quadratic_h(2);
  FrequencyMap om = omega_of(h);
  CHECK(om.n == 2);
  VectorXd y = vec2(0.3, -1.2);
  VectorXd w = om(y);
  CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(-1.2).epsilon(1e-15));

  // h = y1^2/2 + y2  ->  omega = (y1, 1)
  Series h2(2, true);
  YPoly p;
  VectorXi d(2);
  d << 2, 0;
  p.add_term(YPoly::pack(d), 0.5);
  d << 0, 1;
  p.add_term(YPoly::pack(d), 1.0);
  h2.set_coeff(VectorXi::Zero(2), p);
  FrequencyMap om2 = omega_of(h2);
  VectorXd w2 = om2(y);
  CHECK(w2[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(w2[1] == doctest::Approx(1.0).epsilon(1e-15));

  // angle-dependent h is rejected
  Series bad = quadratic_h(2);
  VectorXi k = ivec2(1, 0);
  bad.set_coeff(k, cplx(0.5, 0));
  bad.set_coeff(-k, cplx(0.5, 0));
  CHECK_THROWS_AS(omega_of(bad), std::invalid_argument);
}

TEST_CASE("frequency map matches finite differences on a convex quartic") {
  // h = |y|^2/2 + 0.1 (y1^4 + y2^4 + y1^2 y2^2)
  Series h(2, true);
  YPoly p;
  VectorXi d(2);
  d << 2, 0;
  p.add_term(YPoly::pack(d), 0.5);
  d << 0, 2;
  p.add_term(YPoly::pack(d), 0.5);
  d << 4, 0;
  p.add_term(YPoly::pack(d), 0.1);
  d << 0, 4;
  p.add_term(YPoly::pack(d), 0.1);
  d << 2, 2;
  p.add_term(YPoly::pack(d), 0.1);
  h.set_coeff(VectorXi::Zero(2), p);

  FrequencyMap om = omega_of(h);
  SplitMix64 rng(7);
  VectorXcd x0 = VectorXcd::Zero(2);
  const double step = 1e-5;
  for (int t = 0; t < 10; ++t) {
    VectorXd y = rng.ball(VectorXd::Zero(2), 1.0);
    VectorXd w = om(y);
    for (int j = 0; j < 2; ++j) {
      VectorXd yp = y, ym = y;
      yp[j] += step;
      ym[j] -= step;
      double fd = (h.evaluate(yp.cast<cplx>(), x0).real() -
                   h.evaluate(ym.cast<cplx>(), x0).real()) /
                  (2 * step);
      CHECK(std::abs(w[j] - fd) < 1e-8);
    }
  }
}

TEST_CASE("fully non-resonant zone membership") {
  CoveringParams p = params(0.05, 3, 9, 3);

  Certificate c;
  CHECK(in_omega0(vec2(1.0, 1.4142135), p, &c));
  CHECK(c.satisfied);
  // binding generator is (1,-1): divisor |1 - 1.4142135|
  CHECK(c.mode == ivec2(1, -1));
  CHECK(c.divisor == doctest::Approx(0.4142135).epsilon(1e-9));
  CHECK(c.threshold == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(generators_up_to(2, 3).size() == 8);

  CHECK_FALSE(in_omega0(vec2(0.0, 1.0), p, &c));
  CHECK(c.mode == ivec2(1, 0));
  CHECK(c.divisor == 0.0);

  CHECK_FALSE(in_omega0(vec2(1.0, 1.0), p, &c));
  CHECK(c.mode == ivec2(1, -1));
  CHECK(c.divisor == 0.0);

  // boundary is excluded: min divisor exactly alpha/2
  CoveringParams q = params(0.05, 2, 6, 3);
  CHECK_FALSE(in_omega0(vec2(0.025, 1.3), q));
  CHECK(in_omega0(vec2(0.0250001, 1.3), q));
}

TEST_CASE("simple-resonance zone membership") {
  CoveringParams p = params(0.01, 2, 6, 1);
  VectorXi k = ivec2(1, 0);

  Certificate c;
  CHECK(in_omega1k(vec2(0.0, 0.5), k, p, &c));
  CHECK(c.kind == "omega1k:nonresonant");
  CHECK(c.divisor == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.threshold == doctest::Approx(0.18).epsilon(1e-12));

  // w = 0 fails the transverse non-resonance condition
  CHECK_FALSE(in_omega1k(vec2(0.0, 0.0), k, p, &c));
  CHECK(c.kind == "omega1k:nonresonant");
  CHECK_FALSE(c.satisfied);

  // near the |w.k| boundary but inside
  CHECK(in_omega1k(vec2(0.005, 0.5), k, p));

  // |w.k| >= alpha is excluded (strict)
  CHECK_FALSE(in_omega1k(vec2(0.01, 0.5), k, p, &c));
  CHECK(c.kind == "omega1k:resonant");
  CHECK_FALSE(in_omega1k(vec2(0.02, 0.5), k, p));

  // perpendicular part must stay below M (strict)
  CHECK_FALSE(in_omega1k(vec2(0.0, 1.0), k, p, &c));
  CHECK(c.kind == "omega1k:bounded");
  CHECK(c.divisor == doctest::Approx(1.0));
}

TEST_CASE("double-resonance zone membership") {
  CoveringParams p = params(0.01, 2, 6, 1);
  VectorXi k = ivec2(1, 0), l = ivec2(0, 1);

  CHECK(in_omega2kl(vec2(0.0, 0.0), k, l, p));
  CHECK_FALSE(in_omega2kl(vec2(0.0, 0.5), k, l, p));

  // first condition strict: |w.k| = alpha exactly is out
  CHECK_FALSE(in_omega2kl(vec2(0.01, 0.0), k, l, p));
  // third condition NON-strict: |perp.l| = 3 alpha K2/|k| exactly is in
  CHECK(in_omega2kl(vec2(0.0, 0.18), k, l, p));
  CHECK_FALSE(in_omega2kl(vec2(0.0, 0.1800001), k, l, p));

  CHECK_THROWS_AS(in_omega2kl(vec2(0, 0), k, ivec2(-2, 0), p), std::invalid_argument);
}

TEST_CASE("classification and covering of sample points") {
  Series h = quadratic_h(2);

  SUBCASE("simple resonance neighborhood") {
    CoveringParams p = params(0.01, 2, 6, 1);
    ZoneReport rep = classify(vec2(0.0, 0.5), h, p);
    CHECK_FALSE(rep.inD0);
    REQUIRE(rep.d1.size() == 1);
    CHECK(rep.d1[0] == ivec2(1, 0));
    CHECK(rep.d2Count == 0);
    CHECK(verify_nonresonance(rep, p));
  }

  SUBCASE("non-resonant point") {
    CoveringParams p = params(0.05, 3, 9, 3);
    ZoneReport rep = classify(vec2(1.0, 1.4142135), h, p);
    CHECK(rep.inD0);
    CHECK(rep.d1.empty());
    CHECK(rep.d2Count == 0);

    std::vector<CheckResult> checks;
    CHECK(verify_nonresonance(rep, p, &checks));
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].pass);
    CHECK(checks[0].lhs == doctest::Approx(0.4142135).epsilon(1e-9));
    CHECK(checks[0].rhs == doctest::Approx(0.025));
  }

  SUBCASE("origin is doubly resonant") {
    CoveringParams p = params(0.01, 2, 6, 1);
    ZoneReport rep = classify(vec2(0.0, 0.0), h, p);
    CHECK_FALSE(rep.inD0);
    CHECK(rep.d1.empty());
    // 4 resonance generators with |k|_1 <= 2, each paired with the 23
    // other generators with |l|_1 <= 6
    CHECK(rep.d2Count == 4 * 23);
    CHECK(rep.d2.size() == 8);  // witness list is capped
  }

  SUBCASE("uncovered frequency far outside B_M") {
    CoveringParams p = params(0.01, 2, 6, 1);
    CHECK_THROWS_AS(classify_frequency(vec2(1.3, 1.3), p), CoveringGap);
  }
}

TEST_CASE("covering completeness over random frequencies") {
  struct Setup {
    int n;
    CoveringParams p;
    int samples;
  };
  std::vector<Setup> setups = {
      {2, params(0.05, 3, 9, 3), 4000},
      {2, params(0.01, 2, 6, 1), 3000},
      {3, params(0.2, 2, 8, 2), 3000},
  };
  SplitMix64 rng(0xc0ffee);
  for (const auto& su : setups) {
    for (int t = 0; t < su.samples; ++t) {
      VectorXd w = rng.ball(VectorXd::Zero(su.n), su.p.M * 0.999);
      ZoneReport rep = classify_frequency(w, su.p);  // must not throw
      CHECK((rep.inD0 || !rep.d1.empty() || rep.d2Count > 0));
    }
  }
}

TEST_CASE("certified memberships survive independent integer enumeration") {
  CoveringParams p = params(0.05, 3, 9, 3);
  SplitMix64 rng(99);
  int verified = 0;
  for (int t = 0; t < 200; ++t) {
    VectorXd w = rng.ball(VectorXd::Zero(2), p.M * 0.999);
    ZoneReport rep = classify_frequency(w, p);
    if (rep.inD0 || !rep.d1.empty()) {
      CHECK(verify_nonresonance(rep, p));
      ++verified;
    }
  }
  CHECK(verified > 100);  // most of B_M is non-resonant at this alpha

  // synthetic violation: a report claiming D0 for a frequency that is not
  ZoneReport fake;
  fake.omega = vec2(0.004, 0.9);
  fake.inD0 = true;
  CoveringParams q = params(0.01, 2, 6, 1);
  std::vector<CheckResult> checks;
  CHECK_FALSE(verify_nonresonance(fake, q, &checks));
  REQUIRE(checks.size() == 1);
  CHECK_FALSE(checks[0].pass);
  CHECK(checks[0].lhs == doctest::Approx(0.004));
  CHECK(checks[0].rhs == doctest::Approx(0.005));
}

TEST_CASE("distance to a double resonance") {
  // w orthogonal to span(k,l) in R^3
  VectorXd w(3);
  w << 0, 0, 1;
  VectorXi k(3), l(3);
  k << 1, 0, 0;
  l << 0, 1, 0;
  CHECK(dist_double_resonance(w, k, l) == doctest::Approx(0.0).epsilon(1e-15));

  // w = k projects to itself
  VectorXi k2 = ivec2(1, 2), l2 = ivec2(0, 1);
  CHECK(dist_double_resonance(vec2(1, 2), k2, l2) == doctest::Approx(std::sqrt(5.0)));

  // parallel pair is rejected
  CHECK_THROWS_AS(dist_double_resonance(vec2(1, 0), ivec2(1, -1), ivec2(-2, 2)),
                  std::invalid_argument);

  // in R^2 the projection onto span(k,l) is the whole vector
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    VectorXd v = rng.ball(VectorXd::Zero(2), 2.0);
    CHECK(dist_double_resonance(v, k2, l2) == doctest::Approx(v.norm()).epsilon(1e-12));
  }
}

TEST_CASE("double-resonance members sit close to the exact resonance") {
  CoveringParams p = params(0.01, 2, 6, 1);
  std::vector<std::pair<VectorXi, VectorXi>> pairs = {
      {ivec2(1, 0), ivec2(0, 1)},
      {ivec2(1, 1), ivec2(1, -2)},
      {ivec2(2, 1), ivec2(1, 3)},
  };
  SplitMix64 rng(0xabcd);
  for (const auto& [k, l] : pairs) {
    VectorXd kd = k.cast<double>(), ld = l.cast<double>();
    double kn = kd.norm();
    VectorXd kh = kd / kn;
    VectorXd hv = ld - ld.dot(kd) / kd.squaredNorm() * kd;  // perp part of l
    VectorXd hh = hv / hv.norm();
    double bound = std::sqrt(10.0) * p.alpha * p.K2 * kn * ld.norm();
    int accepted = 0;
    for (int t = 0; t < 10000; ++t) {
      // constructive sampling of the wetton conditions
      double a = rng.uniform(-p.alpha / kn, p.alpha / kn) * 0.999;
      double bmax = std::min(p.M * 0.999, 3 * p.alpha * p.K2 / (kn * std::abs(hh.dot(ld))));
      double b = rng.uniform(-bmax, bmax) * 0.999;
      VectorXd w = a * kh + b * hh;
      if (!in_omega2kl(w, k, l, p)) continue;
      ++accepted;
      CHECK(dist_double_resonance(w, k, l) <= bound);
    }
    CHECK(accepted > 9000);  // construction should nearly always land inside
  }
}

TEST_CASE("measure of the double-resonance set") {
  Series h = quadratic_h(2);
  Domain D = Domain::ball(VectorXd::Zero(2), 1.0, 0.1, 0.5);
  CoveringParams p = params(0.02, 2, 6, 1);

  CHECK_THROWS_AS(measure_estimate_D2(h, D, p, 999, 1), std::invalid_argument);

  D2Measure m = measure_estimate_D2(h, D, p, 100000, 42);
  CHECK(m.samples == 100000);
  CHECK(m.volume == doctest::Approx(3.14159265358979).epsilon(1e-12));
  // strips around the four |k|_1 <= 2 resonances: ~3% of the unit disk
  CHECK(m.fraction > 0.02);
  CHECK(m.fraction < 0.05);
  CHECK(m.estimate == doctest::Approx(m.fraction * m.volume));

  // the summed per-pair area bound dominates the estimate
  CHECK(m.estimate <= m.boundSum);
  // ... by construction of the fixture the bound is loose but not absurd
  CHECK(m.boundSum < 100 * m.estimate);

  // alpha^2 scaling with common random numbers: halving alpha divides the
  // estimate by ~4
  CoveringParams ph = p;
  ph.alpha = p.alpha / 2;
  D2Measure mh = measure_estimate_D2(h, D, ph, 100000, 42);
  double ratio = m.estimate / mh.estimate;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
  // and the bound scales exactly like alpha^2
  CHECK(mh.boundSum == doctest::Approx(m.boundSum / 4).epsilon(1e-12));

  // alpha -> 0: the estimate vanishes
  CoveringParams p0 = p;
  p0.alpha = 1e-6;
  D2Measure m0 = measure_estimate_D2(h, D, p0, 2000, 7);
  CHECK(m0.estimate == 0.0);
}

TEST_CASE("non-resonance under complex widening") {
  Series h = quadratic_h(2);

  SUBCASE("non-resonant point, graded radii") {
    CoveringParams p = params(0.05, 3, 9, 3);
    ZoneReport rep = classify(vec2(1.0, 1.4142135), h, p);
    CHECK(complex_widening_check(rep, h, p, 0.0));
    CHECK(complex_widening_check(rep, h, p, 0.001, 128, 3));
    // threshold closes up: alpha/2 - L r K1 <= 0
    CHECK_FALSE(complex_widening_check(rep, h, p, 0.05));
  }

  SUBCASE("simple resonance, graded radii") {
    CoveringParams p = params(0.01, 2, 6, 1);
    ZoneReport rep = classify(vec2(0.0, 0.5), h, p);
    CHECK(complex_widening_check(rep, h, p, 0.0));
    CHECK(complex_widening_check(rep, h, p, 0.01, 128, 3));
    CHECK_FALSE(complex_widening_check(rep, h, p, 0.5));
  }

  SUBCASE("understated Lipschitz constant is caught by sampling") {
    // margin over alpha/2 is tiny; with L understated the degraded
    // threshold stays high while the true divisor dips below it
    CoveringParams p = params(0.05, 2, 6, 3);
    p.L = 0.1;
    ZoneReport rep = classify(vec2(0.026, 1.3), h, p);
    REQUIRE(rep.inD0);
    CHECK_FALSE(complex_widening_check(rep, h, p, 0.01, 256, 11));
  }

  SUBCASE("purely double-resonant report certifies nothing") {
    CoveringParams p = params(0.01, 2, 6, 1);
    ZoneReport rep = classify(vec2(0.0, 0.0), h, p);
    CHECK_FALSE(complex_widening_check(rep, h, p, 0.0));
  }
}

TEST_CASE("sampled Lipschitz constant of the frequency map") {
  Domain D = Domain::ball(VectorXd::Zero(2), 1.0, 0.0, 0.5);
  CHECK(estimate_lipschitz(quadratic_h(2), D) == doctest::Approx(1.0).epsilon(1e-12));

  // quartic term pushes the Hessian above the identity
  Series h(2, true);
  YPoly q;
  VectorXi d(2);
  d << 2, 0;
  q.add_term(YPoly::pack(d), 0.5);
  d << 0, 2;
  q.add_term(YPoly::pack(d), 0.5);
  d << 4, 0;
  q.add_term(YPoly::pack(d), 0.25);
  h.set_coeff(VectorXi::Zero(2), q);
  double L = estimate_lipschitz(h, D, 512);
  CHECK(L > 1.0);
  CHECK(L <= 1.0 + 3.0);  // 1 + 3 y1^2 on |y1| <= 1
}

TEST_CASE("zone report serialization") {
  Series h = quadratic_h(2);
  CoveringParams p = params(0.01, 2, 6, 1);
  ZoneReport rep = classify(vec2(0.0, 0.5), h, p);
  nlohmann::json j = zone_report_json(rep);

  CHECK(j["inD0"] == false);
  REQUIRE(j["d1"].size() == 1);
  CHECK(j["d1"][0] == std::vector<int>{1, 0});
  CHECK(j["d2Count"] == 0);
  CHECK(j["y"][1] == doctest::Approx(0.5));
  CHECK(j["omega"][1] == doctest::Approx(0.5));
  bool sawNonres = false;
  for (const auto& c : j["certificates"]) {
    if (c["kind"] == "omega1k:nonresonant") {
      sawNonres = true;
      CHECK(c["satisfied"] == true);
      CHECK(double(c["divisor"]) == doctest::Approx(0.5));
      CHECK(double(c["threshold"]) == doctest::Approx(0.18));
    }
  }
  CHECK(sawNonres);
}

TEST_CASE("raster export labels the zone structure") {
  Series h = quadratic_h(2);
  CoveringParams p = params(0.01, 2, 6, 1);
  std::ostringstream os;
  raster_csv(os, h, p, vec2(0.0, 0.0), vec2(1.1, 1.1), 5, 5);

  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "y1,y2,zone,detail");
  std::map<std::pair<int, int>, std::pair<std::string, std::string>> cells;
  int row = 0, col = 0, count = 0;
  while (std::getline(is, line)) {
    auto p1 = line.find(','), p2 = line.find(',', p1 + 1), p3 = line.find(',', p2 + 1);
    REQUIRE(p3 != std::string::npos);
    cells[{row, col}] = {line.substr(p2 + 1, p3 - p2 - 1), line.substr(p3 + 1)};
    ++count;
    if (++col == 5) {
      col = 0;
      ++row;
    }
  }
  CHECK(count == 25);
  CHECK(cells[{0, 0}].first == "D2");    // origin
  CHECK(cells[{2, 0}].first == "D1");    // y = (0, 0.55)
  CHECK(cells[{2, 0}].second == "1 0");  // resonance generator
  CHECK(cells[{2, 1}].first == "D0");    // y = (0.275, 0.55)
  CHECK(cells[{4, 4}].first == "gap");   // |omega| past M, honest label
  CHECK(cells[{2, 2}].first == "D1");    // y = (0.55, 0.55) on the (1,-1) line
  CHECK(cells[{2, 2}].second == "1 -1");

  CHECK_THROWS_AS(raster_csv(os, quadratic_h(3), p, vec2(0, 0), vec2(1, 1), 4, 4),
                  std::invalid_argument);
}
