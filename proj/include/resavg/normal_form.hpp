#ifndef RESAVG_NORMAL_FORM_HPP
#define RESAVG_NORMAL_FORM_HPP

// The averaging engine. One step solves the homological equation for the low
// non-resonant modes and pushes the Hamiltonian through the time-1 flow of
// the generator (a truncated Lie series with certified tail bounds); the
// iterated normal form runs one coarse preliminary step followed by K fine
// steps, tracking every contraction number theta_i, the analyticity budget,
// and the displacement bounds of the composed change of variables. The
// assumption-level wrappers run the whole machine on a fully non-resonant or
// a simply resonant zone with the alpha = sqrt(eps) K2^nu calibration.

#include <iosfwd>
#include <string>
#include <vector>

#include "domain.hpp"
#include "series.hpp"
#include "zones.hpp"

namespace resavg {

// a contraction/smallness hypothesis failed; theta is the offending value
struct SmallnessViolated : std::runtime_error {
  double theta;
  SmallnessViolated(const std::string& what, double th)
      : std::runtime_error(what), theta(th) {}
};

// parameters of a single averaging step on `domain`
struct StepParams {
  LatticeSpec lattice;  // resonance module: {0} or the line Z k
  int K = 2;            // Fourier cutoff separating "low" from "high" modes
  double alphaEff = 0;  // certified lower bound for |h'(y).m| on the complex
                        // domain, over low modes m outside the lattice
  double rho = 0;       // action-widening spent by the step
  double sigma = 0;     // angle-strip width spent by the step
  Domain domain;        // where the input Hamiltonian is controlled

  void validate(int n) const;  // throws std::invalid_argument
};

// gradient of the integrable part (requires h angle-independent, polynomial)
std::vector<YPoly> integrable_gradient(const Series& h);

// split of the perturbation driven by the cutoff and the lattice:
//   fK    = low modes outside the lattice     (removed by one step)
//   fFlat = lattice modes plus high modes     (carried along untouched)
// fFlat + fK == f exactly, as coefficient maps.
struct FlatSplit {
  Series fFlat;
  Series fK;
};
FlatSplit split_flat(const Series& f, const LatticeSpec& lam, int K);

// Solve {h, phi} + fK = 0 mode by mode: phi_m(y) = -i fK_m(y) / (h'(y).m).
// The divisor polynomials are rational-coefficient denominators certified
// below by p.alphaEff; each one is additionally evaluated at deterministic
// complex sample points of the widened domain and DivisorTooSmall is thrown
// if any sample dips under the certificate. The returned series satisfies
// {h,phi} + fK = 0 up to 1e-9 * |fK| at 20 sample points (verified).
Series solve_homological(const Series& h, const Series& fK, const StepParams& p);

// max |{h,phi} + fK| over `samples` deterministic complex points of the
// widened domain (should vanish; the sampled residual measures rounding)
double homological_residual(const Series& h, const Series& phi, const Series& fK,
                            const Domain& dom, int samples = 20);

// Truncated Lie transform sum_{l<=J} ad_phi^l u / l! with ad_phi u := {u, phi}.
// theta = 4 e |phi| / (rho sigma) must be <= 1; the dropped tail obeys
//   |u o X - truncation| <= 2 (theta/2)^J |{u,phi}|_(half-shrunk)
// on domain.shrunk(rho, sigma). J < 0 picks the smallest order that brings
// this bound under tailTol * |u| (tailTol < 0 uses 1e-12); the cap J = 20
// throws SmallnessViolated if it binds. The bound lands in value.discarded,
// on top of the input ledger amplified by (1 + 2 theta) (the Lie echo of a
// pre-existing error term is geometric with ratio theta/2).
struct LieResult {
  Series value;
  int order = 0;
  double theta = 0;      // contraction number of the flow
  double tailBound = 0;  // certified l1 bound for the dropped tail
};
LieResult lie_transform_ex(const Series& u, const Series& phi, const StepParams& p,
                           int J = -1, double tailTol = -1);
Series lie_transform(const Series& u, const Series& phi, const StepParams& p,
                     int J = -1);

// One averaging step applied to H = h + f: with phi solving the homological
// equation for fK, the transformed Hamiltonian is h + fPlus where
//   fPlus = fFlat + fStar,
//   fStar = sum_{l>=1} l/(l+1)! ad^l fK  +  sum_{l>=1} 1/l! ad^l fFlat.
// theta = 4 e |fK| / (alphaEff rho sigma) must be <= 1. Recorded checks:
// generator bound |phi| <= |fK|/alphaEff, sampled homological residual, and
// the step contraction |fStar| <= 4 theta |f| on the shrunk domain. dispY /
// dispX are certified bounds for how far the time-1 flow moves any point
// (l1 in actions, per-coordinate in angles).
struct AveragingStep {
  Series fPlus, phi;
  Series fFlat, fK, fStar;
  double theta = 0;     // step contraction number
  double thetaHat = 0;  // flow contraction number of the generator
  double dispY = 0, dispX = 0;
  double residual = 0;
  int orderMain = 0, orderFlat = 0;  // Lie truncation orders of the two chains
  double tailMain = 0, tailFlat = 0;
  std::vector<CheckResult> checks;
};
AveragingStep averaging_step(const Series& h, const Series& f, const StepParams& p,
                             double tailTol = 1e-12);

// contraction bookkeeping of a full normal-form run
struct ThetaLedger {
  double thetaStar = 0;   // 2^11 K^2 |f| / (alpha r s), must be < 1
  double thetaMinus1 = 0; // preliminary step (rho = r/4, sigma = s/2K)
  double theta0 = 0;      // first fine step
  double delta = 0;       // 2^5 e K^3 / (alpha r s): theta_i = delta |f_i^K|_i
  std::vector<double> thetaSeq;  // theta_0 .. theta_K (last one diagnostic)
};

struct StepRecord {
  int index = 0;  // -1 for the preliminary step, then 0..K-1
  double r = 0, s = 0;  // input domain widths of the step
  double theta = 0;
  double fKNorm = 0, phiNorm = 0, fStarNorm = 0;
  int orderMain = 0, orderFlat = 0;
  double residual = 0;
  double dispY = 0, dispX = 0;
};

struct NormalFormResult {
  int K = 0;
  LatticeSpec lattice;
  std::vector<Series> generators;  // K+1 of them, preliminary first
  Series g;           // lattice part of the final perturbation (g = P g)
  Series fFlat;       // untouched part of the *input* perturbation
  Series fStar;       // total change: fFinal - fFlat
  Series fStarStar;   // non-lattice part of the final perturbation
  Series fFinal;      // H o Psi = h + fFinal;  fFinal = g + fStarStar
  ThetaLedger ledger;
  Domain domainIn, domainOut;  // out: widths r/2 and s(1-1/K)
  double dispY = 0, dispX = 0; // summed displacement bounds of Psi
  std::vector<StepRecord> steps;
  std::vector<std::pair<std::string, NormValue>> norms;
  std::vector<CheckResult> checks;
};

// Iterated normal form: preliminary step with rho = r/4, sigma = s/2K, then
// K steps with rho = r/4K, sigma = s/2K^2, landing on (r/2, s(1-1/K)).
// Requires thetaStar < 1; each step's theta_i <= (thetaStar/8)^(i+1) is a
// hard assertion (SmallnessViolated names the step otherwise). Recorded
// final checks: |fStar| <= thetaStar |f| / K, the low non-resonant residue
// <= (thetaStar/8)^K 8|f|/(e K), |g - P f| <= thetaStar |f| / K, and the
// exponentially small remainder at half strip.
NormalFormResult normal_form(const Series& h, const Series& f,
                             const LatticeSpec& lam, int K, const Domain& domain,
                             double alphaEff, double tailTol = 1e-12);

// ---- flow oracles ----

// real trajectory of the Hamiltonian flow of F (dy = -dF/dx, dx = +dF/dy),
// fixed-step RK4 over total time t
struct PhasePoint {
  VectorXd y, x;
};
PhasePoint hamiltonian_flow(const Series& F, const PhasePoint& p0, double t,
                            int steps);

// composed change of variables: time-1 flows of the generators applied last
// generator first (so that H o Psi means flowing by the last one first)
PhasePoint apply_transformation(const std::vector<Series>& generators,
                                const PhasePoint& p, int stepsPerFlow = 200);

// ---- zone-level averaging, alpha = sqrt(eps) K2^nu calibration ----

// Result of averaging eps*f over one zone. g and fStarStar are per unit eps
// (the engine runs on eps*f; both outputs are divided by eps afterwards).
struct ZoneAveraging {
  NormalFormResult core;
  Series g, fStarStar;
  double eps = 0;
  double alpha = 0;     // sqrt(eps) K2^nu
  double alphaEff = 0;  // divisor floor handed to the engine
  double rCore = 0;     // action radius of the zone run
  double sIn = 0;       // strip the engine starts from
  VectorXi k;           // resonance generator; empty for the non-resonant zone
  double thetaBound = 0;  // parameter-only bound used as rhs of the g-check
  bool hypothesesMet = true;
  std::vector<CheckResult> hypothesisChecks;
  std::vector<CheckResult> checks;
};

// Fully non-resonant zone: lattice {0}, cutoff K1, divisor floor alpha/4 on
// the complex widening rCore = alpha/(4 L K1). Every center must lie in the
// non-resonant zone (CoveringGap otherwise). rAnalyt and s describe the
// analyticity domain of the unscaled data (used by the hypothesis checks).
ZoneAveraging averaging_nonresonant(const Series& h, const Series& f, double eps,
                                    const CoveringParams& p,
                                    const std::vector<VectorXd>& centers,
                                    double rAnalyt, double s,
                                    double tailTol = 1e-12);

// Simply resonant zone of the generator k: lattice Z k, cutoff K2, radius
// rCore = alpha/(L|k|), divisor floor alpha K2/|k| (|k| Euclidean).
ZoneAveraging averaging_at_simple_resonance(const Series& h, const Series& f,
                                            double eps, const VectorXi& k,
                                            const CoveringParams& p,
                                            const std::vector<VectorXd>& centers,
                                            double rAnalyt, double s,
                                            double tailTol = 1e-12);

// ---- reports ----

// deterministic JSON report: ledger, domains, per-step records, norms, checks
std::string normal_form_json(const NormalFormResult& nf);
// per-step norm table as CSV (header + one row per step)
void step_norms_csv(std::ostream& os, const NormalFormResult& nf);

}  // namespace resavg

#endif
