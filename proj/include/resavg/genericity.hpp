#ifndef RESAVG_GENERICITY_HPP
#define RESAVG_GENERICITY_HPP

// Non-degeneracy classes of potentials: tail functions, membership tests
// with finite verification horizon, product-measure sampling of the unit
// ball, the empirical measure bound for the complement, and the
// Cartan-estimate machinery quantifying where y-dependent coefficients stay
// uniformly away from zero. Everything sampled is seeded and deterministic.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "series.hpp"
#include "ypoly.hpp"

namespace resavg {

// ---- tail functions ----

// tau0(delta) = (4/s) log(e + 2^9/(s^n gamma delta)): the mode order beyond
// which a lower bound on |f_k| certifies cosine-like effective potentials
double tail_tau0(double delta, double gamma, double s, int n);

// the four-term tail used by the y-dependent theorem; factor 2^6 n^2 / min{s,1}
struct TauStarBreakdown {
  double factor = 0;
  double terms[4] = {0, 0, 0, 0};
  double value = 0;  // factor * max(terms)
};
TauStarBreakdown tail_taustar_terms(double delta, double gamma, double mu,
                                    double s, int n);
double tail_taustar(double delta, double gamma, double mu, double s, int n);

// delta -> tau(delta), non-increasing and non-negative on (0,1]
struct TailFunction {
  enum class Kind { tau0, tauStar, custom };
  Kind kind = Kind::custom;
  double gamma = 1, mu = 1, s = 1;
  int n = 2;
  std::function<double(double)> fn;  // only for Kind::custom

  double operator()(double delta) const;

  static TailFunction zero();  // tau == 0: every mode order is constrained
  static TailFunction make_tau0(double gamma, double s, int n);
  static TailFunction make_taustar(double gamma, double mu, double s, int n);
  static TailFunction custom(std::function<double(double)> f);
};

// spot-check the defining monotonicity on a geometric delta-grid in (0,1]
bool tail_spot_check(const TailFunction& t, int gridPoints = 33);

// ---- membership ----

struct ClassParams {
  double s = 1;
  int n = 2;
  double delta = 0.5;  // in (0,1]
  TailFunction tail = TailFunction::zero();
  int modeCutoff = 8;  // finite verification horizon

  void validate() const;  // throws std::invalid_argument
};

struct ClassMembership {
  bool inClass = true;
  bool vacuous = false;  // no mode order in (tau, cutoff]: nothing was checked
  double tau = 0;
  long checked = 0;                 // number of modes actually tested
  std::optional<VectorXi> witness;  // first violating mode, test order
};

// |f_k| >= delta |k|_1^{-n} e^{-|k|_1 s} for every mode with
// tau(delta) < |k|_1 <= modeCutoff (both signs of each generator).
// f must be an x-only potential: constant coefficients.
ClassMembership in_class(const Series& f, const ClassParams& p);

// ---- product-measure sampling ----

// One draw from the product measure on the unit ball: z_k uniform on the
// closed unit disk per generator |k|_1 <= modeCutoff, f_k = z_k e^{-|k|_1 s},
// f_{-k} = conj(f_k). The weighted sup-norm at width s is <= 1 by construction.
Series sample_unit_ball(double s, int n, int modeCutoff, std::uint64_t seed);

struct EmpiricalMeasure {
  int N = 0;
  long inCount = 0;
  double fraction = 0;  // empirical fraction inside the class
  double sumTerm = 0;   // sum' |k|_1^{-2n} over tested generators
  double bound = 0;     // min(1, delta^2 sumTerm): failure-probability bound
  double sigma = 0;     // binomial standard error of the bound rate
  bool pass = false;    // fraction >= 1 - bound - 3 sigma
};

// sample N potentials and compare the in-class fraction with the
// per-mode-failure union bound (area ratio of the uniform disk)
EmpiricalMeasure empirical_measure(const ClassParams& p, int N, std::uint64_t seed);

// ---- Cartan bad set (y-dependent coefficients) ----

struct CartanParams {
  double r = 1;    // complex analyticity radius around y0
  double mu = 0;   // exceptional-measure budget, in (0,1)
  VectorXd y0;     // expansion point
  double delta = 0.5;  // class constant driving deltaHat_k = delta/|k|_1^n

  void validate() const;
};

struct CartanPerK {
  VectorXi k;
  double bk = 0;        // |k|_1^{-n/2} weight
  double deltaHat = 0;  // delta / |k|_1^n
  double deltaMu = 0;   // threshold deltaHat (mu bk / 30 e^3)^{ln 1/deltaHat}
  double valueAt0 = 0;  // |g_k(y0)|
  double supBound = 0;  // certified sup bound of |g_k| on |y-y0| <= r
};

struct CartanBadSet {
  int N = 0;
  long badCount = 0;
  double ballVolume = 0;  // vol of the real ball of radius r/2e
  double estimate = 0;    // badCount/N * ballVolume
  double bZ = 0;          // sum of bk over the supplied modes
  double bound = 0;       // (1/2) meas(S^{n-1}) bZ (r/2e)^n mu
  double sigma = 0;       // binomial se of the bound rate, scaled by volume
  bool pass = false;      // estimate <= bound + 3 sigma
  std::vector<CartanPerK> perK;
};

// Monte-Carlo measure of {y in B_{r/2e}(y0) : some |g_k(y)| < delta_k(mu)}
// against the Cartan-estimate bound. Inputs must be normalized:
// sup |g_k| <= 1 on the complex r-ball and |g_k(y0)| >= deltaHat_k
// (std::invalid_argument otherwise).
CartanBadSet cartan_bad_set(const std::vector<std::pair<VectorXi, YPoly>>& fkPolys,
                            const CartanParams& cp, int N, std::uint64_t seed);

// surface measure of S^{n-1} and volume of the n-ball of radius rho
double sphere_measure(int n);
double ball_volume(int n, double rho);

// ---- hypothesis gate of the y-dependent theorem ----

struct EpitaphParams {
  int n = 2;
  double s = 1;
  double L = 1;      // Lipschitz constant of the frequency map
  double delta = 0;  // class constant, in (0, e^{-8})
  double gamma = 0;  // closeness target, in (0,1)
  double mu = 0;     // Cartan budget, in (0, e^{-8})
  int K1 = 2;
  double nu = 0;
  double K2 = 0;  // supplied cutoff tested against the six lower bounds
};

struct GateTerm {
  std::string name;
  double lnRequired = 0;  // natural log of the K2 lower bound
  bool pass = false;      // ln K2 >= lnRequired
};

struct EpitaphGate {
  bool pass = false;
  double kappa = 0;    // 2^{2n+10} n^{2n} L / s^{2n+1}
  double muTilde = 0;  // mu / 30 e^3
  double nTilde = 0;   // 2 nu - 2n - 3
  double tauStar = 0;  // admissibility floor for |k|_1
  std::vector<GateTerm> terms;       // the six cutoff lower bounds
  std::vector<CheckResult> checks;   // parameter-range hypotheses
};

// evaluate every hypothesis inequality of the y-dependent theorem in log
// space (the lower bounds overflow doubles for small delta, by design)
EpitaphGate theorem_epitaph_gate(const EpitaphParams& p);

}  // namespace resavg

#endif
