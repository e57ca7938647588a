#include "resavg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "resavg/rng.hpp"

namespace resavg {

namespace {

constexpr double kRelSlack = 1e-12;  // absorbs float rounding in exp products

AlgebraContext* ctx_of(const Series& f) { return f.context().get(); }

// per-mode coefficient bounds in sorted mode order (deterministic reduction)
std::vector<std::pair<ModeKey, double>> mode_bounds(const Series& f, const Domain& d) {
  AlgebraContext* ctx = ctx_of(f);
  std::vector<std::pair<ModeKey, double>> out;
  out.reserve(f.num_modes());
  for (ModeKey m : f.sorted_modes()) out.push_back({m, f.find(m)->bound_dom(d, ctx)});
  return out;
}

}  // namespace

// Both Fourier bounds add Series::discarded: the ledger is an l1 bound for
// dropped tails (valid on the domain the series was produced on, hence on any
// shrinking of it), so the sum stays an upper bound for the true object.
NormValue fourier_norm_inf(const Series& f, const Domain& d) {
  double v = 0;
  for (const auto& [m, b] : mode_bounds(f, d))
    v = std::max(v, b * std::exp(mode_l1(m, f.dim()) * d.s));
  return {v + f.discarded, NormKind::ellInfFourier, Rigor::upperBound};
}

NormValue fourier_norm_l1(const Series& f, const Domain& d) {
  double v = 0;
  for (const auto& [m, b] : mode_bounds(f, d))
    v += b * std::exp(mode_l1(m, f.dim()) * d.s);
  return {v + f.discarded, NormKind::ellOneFourier, Rigor::upperBound};
}

NormValue sup_norm_sampled(const Series& f, const Domain& d, int samples,
                           std::uint64_t seed) {
  const int n = f.dim();
  if (samples < 1) throw std::invalid_argument("sup_norm_sampled: samples < 1");
  // 4n Kronecker coordinates per point: 2n to synthesize a complex direction
  // (Box-Muller), n for Re x, n for Im x
  KroneckerSeq seq(4 * n, seed);
  double best = 0;
  VectorXcd y(n), x(n);
  for (int i = 0; i < samples; ++i) {
    const Ball& ball = d.balls[static_cast<std::size_t>(i) % d.balls.size()];
    // complex gaussian direction, normalized to the enclosing sphere R+r
    double nrm2 = 0;
    for (int j = 0; j < n; ++j) {
      double u1 = std::max(seq.coord(i, 2 * j), 1e-18);
      double u2 = seq.coord(i, 2 * j + 1);
      double rad = std::sqrt(-2.0 * std::log(u1));
      y[j] = cplx(rad * std::cos(2 * M_PI * u2), rad * std::sin(2 * M_PI * u2));
      nrm2 += std::norm(y[j]);
    }
    double scale = (ball.R + d.r) / std::sqrt(std::max(nrm2, 1e-300));
    for (int j = 0; j < n; ++j) y[j] = ball.c[j] + scale * y[j];
    for (int j = 0; j < n; ++j) {
      double re = 2 * M_PI * seq.coord(i, 2 * n + j);
      double im = d.s * (2 * seq.coord(i, 3 * n + j) - 1);
      x[j] = cplx(re, im);
    }
    best = std::max(best, std::abs(f.evaluate(y, x)));
  }
  return {best, NormKind::sup, Rigor::sampledEstimate};
}

bool norm_comparison_check(const Series& f, const Domain& d, double sigma,
                           std::vector<CheckResult>* out) {
  if (sigma <= 0) throw std::invalid_argument("norm_comparison_check: sigma <= 0");
  const int n = f.dim();
  // the chain concerns the oscillating part: drop the angle average
  Series osc = project_lattice_complement(f, LatticeSpec::zero());

  double linfS = 0, l1S = 0, linfWide = 0;
  for (const auto& [m, b] : mode_bounds(osc, d)) {
    double w = std::exp(mode_l1(m, n) * d.s);
    double wWide = std::exp(mode_l1(m, n) * (d.s + sigma));
    linfS = std::max(linfS, b * w);
    l1S += b * w;
    linfWide = std::max(linfWide, b * wWide);
  }
  double sup = sup_norm_sampled(osc, d).value;
  double comb = std::pow(2.0 * n / sigma, n);

  CheckResult c1 = make_check("sampled sup <= l1 bound", sup, l1S, kRelSlack);
  CheckResult c2 = make_check("linf bound <= l1 bound", linfS, l1S, kRelSlack);
  CheckResult c3 = make_check("l1 <= (2n/sigma)^n linf(s+sigma)", l1S,
                              comb * linfWide, kRelSlack);
  if (out) {
    out->push_back(c1);
    out->push_back(c2);
    out->push_back(c3);
  }
  return c1.pass && c2.pass && c3.pass;
}

CheckResult tail_bound_check(const Series& f, const Domain& d, int N, double sigma) {
  if (N <= 0 || sigma <= 0 || sigma >= d.s)
    throw std::invalid_argument("tail_bound_check: need N > 0, 0 < sigma < s");
  Series tail = truncate_complement(f, N);
  double lhs = fourier_norm_l1(tail, d.shrunk(0, sigma)).value;
  double rhs = std::exp(-(N + 1) * sigma) * fourier_norm_l1(f, d).value;
  return make_check("tail norm <= e^{-(N+1)sigma} l1", lhs, rhs, kRelSlack);
}

bool cauchy_estimate_check(const Series& f, const Domain& d, double rho, double sigma,
                           std::vector<CheckResult>* out) {
  if (rho <= 0 || rho >= d.r || sigma <= 0 || sigma >= d.s)
    throw std::invalid_argument("cauchy_estimate_check: need 0 < rho < r, 0 < sigma < s");
  const int n = f.dim();
  double norm = fourier_norm_l1(f, d).value;

  double xsum = 0;
  Domain dx = d.shrunk(0, sigma);
  for (int j = 0; j < n; ++j) xsum += fourier_norm_l1(derivative_x(f, j), dx).value;

  double ymax = 0;
  Domain dy = d.shrunk(rho, 0);
  for (int j = 0; j < n; ++j)
    ymax = std::max(ymax, fourier_norm_l1(derivative_y(f, j), dy).value);

  CheckResult c1 = make_check("sum_i l1(d_x_i f) <= l1(f)/(e sigma)", xsum,
                              norm / (M_E * sigma), kRelSlack);
  CheckResult c2 =
      make_check("max_i l1(d_y_i f) <= l1(f)/rho", ymax, norm / rho, kRelSlack);
  if (out) {
    out->push_back(c1);
    out->push_back(c2);
  }
  return c1.pass && c2.pass;
}

bool bracket_norm_bound_check(const Series& f, const Series& g, const Domain& df,
                              const Domain& dg, double rho, double sigma,
                              std::vector<CheckResult>* out) {
  if (df.balls.size() != dg.balls.size())
    throw std::invalid_argument("bracket_norm_bound_check: domains differ in base");
  double rbar = std::min(df.r, dg.r), sbar = std::min(df.s, dg.s);
  if (rho <= 0 || rho >= rbar || sigma <= 0 || sigma >= sbar)
    throw std::invalid_argument("bracket_norm_bound_check: bad shrink widths");

  Domain target = df;
  target.r = rbar - rho;
  target.s = sbar - sigma;
  double lhs = fourier_norm_l1(poisson_bracket(f, g), target).value;

  double nf = fourier_norm_l1(f, df).value;
  double ng = fourier_norm_l1(g, dg).value;
  double rhs = (1.0 / M_E) *
               (1.0 / ((df.r - rbar + rho) * (dg.s - sbar + sigma)) +
                1.0 / ((dg.r - rbar + rho) * (df.s - sbar + sigma))) *
               nf * ng;

  CheckResult c = make_check("l1 bracket <= two-term product bound", lhs, rhs,
                             kRelSlack);
  if (out) out->push_back(c);
  return c.pass;
}

}  // namespace resavg
