#include "resavg/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resavg/lattice.hpp"
#include "resavg/rng.hpp"

namespace resavg {

namespace {

constexpr double kThirtyECubed = 30.0 * 20.085536923187668;  // 30 e^3

std::string vec_str(const VectorXi& k) {
  std::string s = "(";
  for (int i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
  return s + ")";
}

}  // namespace

// ---- tail functions ----

double tail_tau0(double delta, double gamma, double s, int n) {
  if (!(delta > 0) || !(gamma > 0) || !(s > 0)) {
    throw std::invalid_argument("tail_tau0: delta, gamma, s must be positive");
  }
  check_dim(n);
  return (4.0 / s) * std::log(M_E + 512.0 / (std::pow(s, n) * gamma * delta));
}

TauStarBreakdown tail_taustar_terms(double delta, double gamma, double mu,
                                    double s, int n) {
  if (!(delta > 0) || !(gamma > 0) || !(mu > 0) || !(s > 0)) {
    throw std::invalid_argument("tail_taustar: delta, gamma, mu, s must be positive");
  }
  check_dim(n);
  const double st = std::min(s, 1.0);
  const double lead = 64.0 * n * n / st;
  const double lconf = std::log(kThirtyECubed / (delta * mu));
  TauStarBreakdown b;
  b.factor = lead;
  b.terms[0] = std::pow(std::log(lead), 3);
  b.terms[1] = lconf * std::pow(std::log((4.0 / st) * lconf), 2);
  b.terms[2] = std::log(kThirtyECubed / mu) * std::log(1.0 / delta);
  b.terms[3] = std::log(1024.0 / (delta * gamma));
  b.value = lead * std::max({b.terms[0], b.terms[1], b.terms[2], b.terms[3]});
  return b;
}

double tail_taustar(double delta, double gamma, double mu, double s, int n) {
  return tail_taustar_terms(delta, gamma, mu, s, n).value;
}

double TailFunction::operator()(double delta) const {
  switch (kind) {
    case Kind::tau0:
      return tail_tau0(delta, gamma, s, n);
    case Kind::tauStar:
      return tail_taustar(delta, gamma, mu, s, n);
    case Kind::custom:
      return fn ? fn(delta) : 0.0;
  }
  return 0.0;
}

TailFunction TailFunction::zero() {
  TailFunction t;
  t.kind = Kind::custom;
  t.fn = [](double) { return 0.0; };
  return t;
}

TailFunction TailFunction::make_tau0(double gamma, double s, int n) {
  TailFunction t;
  t.kind = Kind::tau0;
  t.gamma = gamma;
  t.s = s;
  t.n = n;
  return t;
}

TailFunction TailFunction::make_taustar(double gamma, double mu, double s, int n) {
  TailFunction t;
  t.kind = Kind::tauStar;
  t.gamma = gamma;
  t.mu = mu;
  t.s = s;
  t.n = n;
  return t;
}

TailFunction TailFunction::custom(std::function<double(double)> f) {
  TailFunction t;
  t.kind = Kind::custom;
  t.fn = std::move(f);
  return t;
}

bool tail_spot_check(const TailFunction& t, int gridPoints) {
  if (gridPoints < 2) gridPoints = 2;
  // descending geometric grid from 1 to 1e-8; tau must grow as delta shrinks
  double prev = -1;
  for (int i = 0; i < gridPoints; ++i) {
    const double delta = std::pow(10.0, -8.0 * i / (gridPoints - 1));
    const double tau = t(delta);
    if (!(tau >= 0) || !std::isfinite(tau)) return false;
    if (prev >= 0 && tau < prev * (1 - 1e-12) - 1e-12) return false;
    prev = tau;
  }
  return true;
}

// ---- membership ----

void ClassParams::validate() const {
  check_dim(n);
  if (!(delta > 0) || delta > 1)
    throw std::invalid_argument("ClassParams: delta must be in (0,1]");
  if (!(s > 0)) throw std::invalid_argument("ClassParams: s must be positive");
  if (modeCutoff < 1)
    throw std::invalid_argument("ClassParams: modeCutoff must be >= 1");
}

namespace {

// |f_k| for an x-only potential; rational or y-dependent coefficients are
// outside the class definition
double coeff_modulus(const Series& f, const VectorXi& k) {
  const Coeff* c = f.find(pack_mode(k));
  if (!c || c->is_zero()) return 0;
  if (!c->is_poly() || !c->as_poly().is_constant())
    throw std::invalid_argument(
        "in_class: potential must be x-only (constant Fourier coefficients)");
  return std::abs(c->as_poly().constant_value());
}

}  // namespace

ClassMembership in_class(const Series& f, const ClassParams& p) {
  p.validate();
  if (f.dim() != p.n)
    throw std::invalid_argument("in_class: dimension mismatch");
  ClassMembership m;
  m.tau = p.tail(p.delta);
  for (const VectorXi& k : generators_up_to(p.n, p.modeCutoff)) {
    const int l1 = k.lpNorm<1>();
    if (!(double(l1) > m.tau)) continue;
    // matches the threshold expression of the exactly-critical example
    // potential; the relative slack only absorbs float rounding
    const double need =
        p.delta * std::pow(double(l1), -p.n) * std::exp(-l1 * p.s);
    for (int sign = 0; sign < 2; ++sign) {
      const VectorXi kk = sign ? VectorXi(-k) : k;
      ++m.checked;
      if (coeff_modulus(f, kk) < need * (1 - 1e-12)) {
        m.inClass = false;
        m.witness = kk;
        return m;
      }
    }
  }
  m.vacuous = (m.checked == 0);
  return m;
}

// ---- product-measure sampling ----

Series sample_unit_ball(double s, int n, int modeCutoff, std::uint64_t seed) {
  check_dim(n);
  if (!(s > 0)) throw std::invalid_argument("sample_unit_ball: s must be positive");
  if (modeCutoff < 1)
    throw std::invalid_argument("sample_unit_ball: modeCutoff must be >= 1");
  Series f(n, true);
  SplitMix64 g(seed);
  for (const VectorXi& k : generators_up_to(n, modeCutoff)) {
    const cplx z = g.unit_disk();
    const double w = std::exp(-k.lpNorm<1>() * s);
    f.set_coeff(k, z * w);
    f.set_coeff(VectorXi(-k), std::conj(z) * w);
  }
  return f;
}

EmpiricalMeasure empirical_measure(const ClassParams& p, int N, std::uint64_t seed) {
  p.validate();
  if (N < 1) throw std::invalid_argument("empirical_measure: N must be >= 1");
  EmpiricalMeasure em;
  em.N = N;
  const double tau = p.tail(p.delta);
  for (const VectorXi& k : generators_up_to(p.n, p.modeCutoff)) {
    const int l1 = k.lpNorm<1>();
    if (double(l1) > tau) em.sumTerm += std::pow(double(l1), -2.0 * p.n);
  }
  em.bound = std::min(1.0, p.delta * p.delta * em.sumTerm);
  SplitMix64 master(seed);
  for (int i = 0; i < N; ++i) {
    const Series f = sample_unit_ball(p.s, p.n, p.modeCutoff, master.next_u64());
    if (in_class(f, p).inClass) ++em.inCount;
  }
  em.fraction = double(em.inCount) / N;
  em.sigma = std::sqrt(em.bound * (1 - em.bound) / N);
  em.pass = em.fraction >= 1 - em.bound - 3 * em.sigma;
  return em;
}

// ---- Cartan bad set ----

void CartanParams::validate() const {
  if (y0.size() < 1 || y0.size() > kMaxDim)
    throw std::invalid_argument("CartanParams: y0 dimension must be in [1,4]");
  if (!(r > 0)) throw std::invalid_argument("CartanParams: r must be positive");
  if (!(mu > 0) || mu >= 1)
    throw std::invalid_argument("CartanParams: mu must be in (0,1)");
  if (!(delta > 0) || delta > 1)
    throw std::invalid_argument("CartanParams: delta must be in (0,1]");
}

double sphere_measure(int n) {
  check_dim(n);
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

double ball_volume(int n, double rho) {
  return sphere_measure(n) * std::pow(rho, n) / n;
}

CartanBadSet cartan_bad_set(const std::vector<std::pair<VectorXi, YPoly>>& fkPolys,
                            const CartanParams& cp, int N, std::uint64_t seed) {
  cp.validate();
  if (fkPolys.empty())
    throw std::invalid_argument("cartan_bad_set: need at least one mode");
  if (N < 1) throw std::invalid_argument("cartan_bad_set: N must be >= 1");
  const int n = int(cp.y0.size());

  CartanBadSet out;
  out.N = N;
  for (const auto& [k, g] : fkPolys) {
    if (k.size() != n || !is_zstar(k))
      throw std::invalid_argument("cartan_bad_set: modes must be nonzero, dim of y0");
    CartanPerK pk;
    pk.k = k;
    const double l1 = k.lpNorm<1>();
    pk.bk = std::pow(l1, -0.5 * n);
    pk.deltaHat = cp.delta / std::pow(l1, n);
    pk.supBound = g.bound_ball(cp.y0, cp.r, n);
    pk.valueAt0 = std::abs(g.eval(cp.y0));
    if (pk.supBound > 1 + 1e-9)
      throw std::invalid_argument("cartan_bad_set: normalization violated for k=" +
                                  vec_str(k) + ": sup bound " +
                                  std::to_string(pk.supBound) + " > 1");
    if (pk.valueAt0 < pk.deltaHat * (1 - 1e-12))
      throw std::invalid_argument("cartan_bad_set: normalization violated for k=" +
                                  vec_str(k) + ": |g(y0)| " +
                                  std::to_string(pk.valueAt0) + " below " +
                                  std::to_string(pk.deltaHat));
    pk.deltaMu =
        pk.deltaHat *
        std::pow(cp.mu * pk.bk / kThirtyECubed, std::log(1.0 / pk.deltaHat));
    out.bZ += pk.bk;
    out.perK.push_back(std::move(pk));
  }

  const double rho = cp.r / (2.0 * M_E);
  out.ballVolume = ball_volume(n, rho);
  out.bound = 0.5 * sphere_measure(n) * out.bZ * std::pow(rho, n) * cp.mu;

  SplitMix64 g(seed);
  for (int i = 0; i < N; ++i) {
    const VectorXd y = g.ball(cp.y0, rho);
    for (const CartanPerK& pk : out.perK) {
      std::size_t idx = &pk - out.perK.data();
      if (std::abs(fkPolys[idx].second.eval(y)) < pk.deltaMu) {
        ++out.badCount;
        break;
      }
    }
  }
  out.estimate = double(out.badCount) / N * out.ballVolume;
  const double q = std::min(1.0, out.bound / out.ballVolume);
  out.sigma = std::sqrt(q * (1 - q) / N) * out.ballVolume;
  out.pass = out.estimate <= out.bound + 3 * out.sigma;
  return out;
}

// ---- hypothesis gate ----

EpitaphGate theorem_epitaph_gate(const EpitaphParams& p) {
  check_dim(p.n);
  if (!(p.s > 0) || !(p.L > 0))
    throw std::invalid_argument("theorem_epitaph_gate: s and L must be positive");
  EpitaphGate g;
  const double eM8 = std::exp(-8.0);
  g.checks.push_back(
      {"mu in (0, e^-8)", p.mu, eM8, p.mu > 0 && p.mu < eM8});
  g.checks.push_back(
      {"delta in (0, e^-8)", p.delta, eM8, p.delta > 0 && p.delta < eM8});
  g.checks.push_back({"gamma in (0,1)", p.gamma, 1.0, p.gamma > 0 && p.gamma < 1});
  g.checks.push_back({"cutoff ladder K2 >= 3 K1 >= 6", 3.0 * p.K1, p.K2,
                      p.K1 >= 2 && p.K2 >= 3.0 * p.K1});
  g.checks.push_back(
      {"nu >= n + 2", double(p.n) + 2, p.nu, p.nu >= double(p.n) + 2});

  g.kappa = std::pow(2.0, 2 * p.n + 10) * std::pow(double(p.n), 2 * p.n) * p.L /
            std::pow(p.s, 2 * p.n + 1);
  g.nTilde = 2 * p.nu - 2 * p.n - 3;
  g.checks.push_back({"decay margin 2 nu - 2n - 3 > 0", 0.0, g.nTilde, g.nTilde > 0});

  bool paramsOk = true;
  for (const CheckResult& c : g.checks) paramsOk = paramsOk && c.pass;

  if (p.mu > 0 && p.delta > 0 && p.gamma > 0) {
    g.muTilde = p.mu / kThirtyECubed;
    g.tauStar = tail_taustar(p.delta, p.gamma, p.mu, p.s, p.n);
    const double lnK1 = std::log(double(p.K1));
    const double nt = g.nTilde;
    const double inf = std::numeric_limits<double>::infinity();
    auto term = [&](std::string name, double lnReq) {
      g.terms.push_back({std::move(name), lnReq,
                         p.K2 > 0 && std::log(p.K2) >= lnReq});
    };
    term("K1^{(2 n^2 / nTilde) ln K1}",
         nt > 0 ? (2.0 * p.n * p.n / nt) * lnK1 * lnK1 : inf);
    term("K1^{(9 / nTilde) ln(1/(delta muTilde))}",
         nt > 0 ? (9.0 / nt) * std::log(1.0 / (p.delta * g.muTilde)) * lnK1 : inf);
    term("e^{(4 / nTilde) ln(1/delta) ln(1/muTilde)}",
         nt > 0 ? (4.0 / nt) * std::log(1.0 / p.delta) * std::log(1.0 / g.muTilde)
                : inf);
    term("(4 e^{s+5} kappa / (delta gamma))^{4 / nTilde}",
         nt > 0 ? (4.0 / nt) * std::log(4.0 * std::exp(p.s + 5) * g.kappa /
                                        (p.delta * p.gamma))
                : inf);
    term("(2^5 / s) ln^2(1/(delta mu))",
         std::log((32.0 / p.s) * std::pow(std::log(1.0 / (p.delta * p.mu)), 2)));
    term("2^14 n^4 / s^2",
         std::log(16384.0 * std::pow(double(p.n), 4) / (p.s * p.s)));
  } else {
    paramsOk = false;
  }

  g.pass = paramsOk;
  for (const GateTerm& t : g.terms) g.pass = g.pass && t.pass;
  return g;
}

}  // namespace resavg
