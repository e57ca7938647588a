#ifndef RESAVG_EFFECTIVE_HPP
#define RESAVG_EFFECTIVE_HPP

// Effective one-angle potential at a simple resonance: the complete normal
// form splitting H o Psi = h + 2|f_k| eps (cos(k.x + phase) + deviation +
// remainder), the certification that the deviation is small enough for the
// potential to stay cosine-like (Morse with one max and one min), and the
// local pendulum model in the resonant frame. The averaging engine does the
// heavy lifting; this layer normalizes, re-indexes to one angle, divides by
// the leading coefficient and checks the closeness theorem's inequalities.

#include <cstdint>
#include <string>
#include <vector>

#include "genericity.hpp"
#include "normal_form.hpp"
#include "series.hpp"
#include "zones.hpp"

namespace resavg {

// the resonant Fourier coefficient vanishes: no cosine model at this k
struct ZeroCoefficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// the cosine-likeness certificate failed; names the violated segment
struct CertificationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- one-angle extraction and the leading harmonic ----

// Re-index a resonant-lattice series g(y, x) = G(y, k.x) to the one-angle
// series G(y, theta): modes j k -> j. Every mode of g must lie on Z k
// (std::invalid_argument otherwise). Coefficients and the discarded ledger
// carry over; norms of the result use theta-width w for x-width w/|k|_1.
Series extract_Gk(const Series& g, const VectorXi& k);

// modulus and phase of the leading harmonic: fk e^{i theta} + conj
// = 2 |fk| cos(theta + phase), phase in [0, 2 pi). Throws ZeroCoefficient.
std::pair<double, double> phase_and_modulus(cplx fk);

// ---- complete normal form at one resonance ----

struct EffectivePotential {
  VectorXi k;
  double modulus = 0;    // |f_k| of the unit-norm perturbation at the center
  double phase = 0;      // in [0, 2 pi)
  double epsEff = 0;     // eps * |f|_s: size multiplying the unit perturbation
  double amplitude = 0;  // 2 |f_k| eps, invariant under the normalization
  Series Gk;             // one-angle lattice part G^k(y, theta), per unit eps
  Series GkTilde;        // (G^k - leading harmonic) / (2 |f_k|)
  Series remainder;      // non-lattice remainder / (2 |f_k|), full-angle
  double gammaBound = 0;       // certified width-2 norm of GkTilde
  double remainderBound = 0;   // certified half-width norm of remainder
};

struct EffectiveParams {
  CoveringParams cov;              // K1, K2, nu, L, M; alpha derived internally
  std::vector<VectorXd> centers;   // zone base points (must lie in the zone)
  double rAnalyt = 0;              // action analyticity radius of the data
  double s = 0;                    // angle analyticity width of the data
  double delta = 0.5;              // class constant
  double gamma = 0.5;              // closeness target
  double tailTol = 1e-12;
  bool strict = true;              // strict: throw when hypotheses fail
};

struct EffectiveResult {
  EffectivePotential pot;
  ZoneAveraging zone;                    // full engine record
  std::vector<CheckResult> hypothesisChecks;
  std::vector<CheckResult> checks;       // closeness + remainder bounds
  bool hypothesesMet = true;
  double normF = 0;                      // |f|_s used for the normalization
};

// Run the averaging engine on the normalized perturbation over the simple
// resonance of k and certify the effective-potential decomposition. The
// hypothesis ledger covers the class membership of f/|f|_s(with the tau0
// tail at gamma), the admissibility window tau0 <= |k|_1 <= K1, and the
// smallness inequalities tying gamma, delta, s, K2, nu and eps. In strict
// mode a failed hypothesis throws SmallnessViolated; otherwise the run
// continues and the result carries hypothesesMet = false.
EffectiveResult complete_normal_form(const Series& h, const Series& f, double eps,
                                     const VectorXi& k, const EffectiveParams& p);

// ---- cosine-likeness certificate ----

struct MorseReport {
  int criticalCount = 0;
  std::vector<double> maxima, minima;  // angle locations in [0, 2 pi)
  double thetaStarWindow = 0;          // arcsin(gamma / e^2)
  double monotoneC = 0;                // derivative-slope floor in the windows
  bool monotoneVerified = false;
  std::vector<CheckResult> checks;
};

// Certify that u(theta) = cos(theta + phase) + G(theta) is Morse with exactly
// one maximum and one minimum. G must be a one-angle series with constant
// coefficients and width-2 norm <= gamma < 1; the certificate combines the
// analytic derivative bounds sup|G'|, sup|G''| <= gamma/e^2 with dense
// sampling (2048 points) with Lipschitz safety margins. Critical points are
// located by bisection in the two monotone windows of half-width
// arcsin(gamma/e^2). Throws CertificationFailed naming the first violated
// segment; std::invalid_argument for malformed inputs.
MorseReport morse_check(double phase, const Series& G, double gamma);

// evaluate the y-dependent coefficients at a fixed action: one-angle series
// with constant coefficients (the input morse_check wants)
Series one_angle_at(const Series& G, const VectorXd& y);

// ---- pendulum reduction ----

struct PendulumModel {
  VectorXi k;
  VectorXd y0;           // resonant action: grad h(y0) . k = 0
  double mk = 0;         // k . Hess h(y0) . k
  double amplitude = 0;  // 2 |f_k| eps
  double phase = 0;
  double Y0n = 0;        // secular action of y0 in the resonant frame
  bool pendulumEquivalent = false;  // withheld when mk vanishes (no convexity)
};

// locate grad h(y) . k = 0 by bisection on the segment [a, b]
// (endpoints must bracket a sign change; tolerance on |y_hi - y_lo|)
VectorXd find_resonant_point(const Series& h, const VectorXi& k, const VectorXd& a,
                             const VectorXd& b, double tol = 1e-12);

// Local model at the resonance: (1/2) mk (Y_n - Y0n)^2 + amplitude cos(X_n +
// phase) in the unimodular frame with secular angle X_n = k.x. Requires
// |grad h(y0) . k| <= 1e-10; the pendulum-equivalence claim is withheld
// (flag false) when mk == 0.
PendulumModel pendulum_reduce(const Series& h, const VectorXi& k, const VectorXd& y0,
                              double amplitude, double phase = 0);

struct PortraitGrid {
  int nY = 81;
  int nX = 181;
  double halfWidthY = 0;  // 0: three separatrix half-widths (or 1.0 if flat)
};

// CSV raster of the model energy on a (Y_n, X_n) grid; header comments carry
// the separatrix energy (value at the hyperbolic point), its half-width
// 2 sqrt(amplitude/mk) and the hyperbolic angle
std::string level_set_portrait(const PendulumModel& m, const PortraitGrid& g);

// calculus helper behind the tail machinery: under a > 2 ln 2,
// 0 < eps < e^{-a^2/2}, t > 4 ln(1/eps) verify e^{-t} t^a < eps;
// vacuously true when the hypotheses do not hold (nothing is claimed)
bool calc_lemma_check(double a, double eps, double t);

}  // namespace resavg

#endif
