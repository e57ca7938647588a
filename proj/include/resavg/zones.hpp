#ifndef RESAVG_ZONES_HPP
#define RESAVG_ZONES_HPP

// Covering of the action/frequency domain into a completely non-resonant
// zone, simple-resonance neighborhoods labeled by lattice generators, and
// the doubly-resonant remainder, plus the certificates and measure
// estimates that justify each label. Zone tests follow the strictness of
// the defining inequalities exactly; classification of a covered point
// never comes back empty.

#include <json.hpp>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "domain.hpp"
#include "series.hpp"

namespace resavg {

struct CoveringGap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoveringParams {
  double alpha = 0;   // small-divisor threshold
  int K1 = 2;         // generator order for zone labels
  int K2 = 2;         // non-resonance order inside simple-resonance zones
  double M = 0;       // frequency bound |omega| < M
  double L = 1;       // Lipschitz constant of omega
  double Lbar = 1;    // Lipschitz constant of the inverse frequency map
  double nu = 0;      // exponent tying alpha to epsilon
  double epsilon = 0; // perturbation size; alpha = sqrt(epsilon) K2^nu if driven

  // theoremLevel additionally demands K2 >= 3 K1 >= 6
  void validate(bool theoremLevel = false) const;
};

// omega = grad h for x-independent polynomial h
struct FrequencyMap {
  int n = 0;
  std::vector<YPoly> grad;

  VectorXd operator()(const VectorXd& y) const;
  VectorXcd eval(const VectorXcd& y) const;
};

FrequencyMap omega_of(const Series& h);

// one defining inequality, reported with its witness mode
struct Certificate {
  std::string kind;  // "omega0" | "omega1k" | ...
  VectorXi mode;
  double divisor = 0;
  double threshold = 0;
  bool satisfied = false;
};

struct ZoneReport {
  VectorXd y;
  VectorXd omega;
  bool inD0 = false;
  std::vector<VectorXi> d1;  // generators whose neighborhood contains y
  long d2Count = 0;            // witnessing double-resonance pairs
  std::vector<std::pair<VectorXi, VectorXi>> d2;  // first few witnesses
  std::vector<Certificate> certs;

  bool inD2() const { return d2Count > 0; }
};

// min over generators |k|_1 <= K1 of |w.k| > alpha/2 (strict)
bool in_omega0(const VectorXd& w, const CoveringParams& p, Certificate* cert = nullptr);

// |w.k| < alpha, |Pperp w| < M, |Pperp w . l| > 3 alpha K2 / |k| for every
// generator l with |l|_1 <= K2 not parallel to k (all strict)
bool in_omega1k(const VectorXd& w, const VectorXi& k, const CoveringParams& p,
                Certificate* cert = nullptr);

// |w.k| < alpha, |Pperp w| < M, |Pperp w . l| <= 3 alpha K2 / |k|
bool in_omega2kl(const VectorXd& w, const VectorXi& k, const VectorXi& l,
                 const CoveringParams& p);

// evaluate omega(y) and test all three zone families; throws CoveringGap
// when no membership holds
ZoneReport classify(const VectorXd& y, const Series& h, const CoveringParams& p);

// classification straight from a frequency value (report's y left empty)
ZoneReport classify_frequency(const VectorXd& w, const CoveringParams& p);

// independent re-verification by full integer-vector enumeration:
// D0 members:   |w.k| >= alpha/2 for all 0 < |k|_1 <= K1
// D1,k members: |w.l| >= 2 alpha K2/|k| for all l not in Zk, |l|_1 <= K2
bool verify_nonresonance(const ZoneReport& rep, const CoveringParams& p,
                         std::vector<CheckResult>* out = nullptr);

// distance from w to the exact double resonance {w.k = w.l = 0}: length of
// the projection of w onto span{k, l}
double dist_double_resonance(const VectorXd& w, const VectorXi& k, const VectorXi& l);

struct D2Measure {
  double fraction = 0;  // sampled fraction of D landing in D2
  double volume = 0;    // reference volume of D (sum of ball volumes)
  double estimate = 0;  // fraction * volume
  double boundSum = 0;  // Lbar^n * sum over pairs of the per-pair area bound
  int samples = 0;
};

D2Measure measure_estimate_D2(const Series& h, const Domain& D, const CoveringParams& p,
                              int nSamples, std::uint64_t seed);

// does non-resonance survive complexification y -> y + delta, |delta| = r,
// with thresholds degraded by L r K? Returns false (not certifiable) when
// the degraded threshold is no longer positive.
bool complex_widening_check(const ZoneReport& rep, const Series& h,
                            const CoveringParams& p, double r, int samples = 64,
                            std::uint64_t seed = 1);

// estimate of the Lipschitz constant of omega: max spectral norm of the
// Hessian of h over sampled points of D (sampled, not rigorous)
double estimate_lipschitz(const Series& h, const Domain& D, int samples = 256,
                          std::uint64_t seed = 2);

nlohmann::json zone_report_json(const ZoneReport& rep);

// 2-d raster of zone labels over [lo1,hi1] x [lo2,hi2] for plotting
void raster_csv(std::ostream& os, const Series& h, const CoveringParams& p,
                const VectorXd& lo, const VectorXd& hi, int nx, int ny);

}  // namespace resavg

#endif
