#ifndef RESAVG_NORMS_HPP
#define RESAVG_NORMS_HPP

// The three norms on analytic functions over D_r x T^n_s and the standard
// inequalities relating them: the weighted l1/linf Fourier norms are sound
// upper bounds (coefficient bounds over the enclosing action balls), the sup
// norm is a sampled lower estimate on a fixed quasi-random boundary grid.
// Inequality checks only ever compare a sampled estimate against an upper
// bound one-sidedly; upper bounds are compared with each other only when the
// underlying per-term mechanism guarantees the comparison is meaningful.

#include <cstdint>
#include <vector>

#include "domain.hpp"
#include "series.hpp"

namespace resavg {

// sup_k bound|f_k| e^{|k|_1 s}   (rigor: upperBound)
NormValue fourier_norm_inf(const Series& f, const Domain& d);

// sum_k bound|f_k| e^{|k|_1 s}   (rigor: upperBound)
NormValue fourier_norm_l1(const Series& f, const Domain& d);

// max |f(y,x)| over quasi-random boundary samples: y on the enclosing complex
// sphere |y-c| = R+r of each ball, Im x spread across [-s,s]^n
// (rigor: sampledEstimate; deterministic for fixed seed)
NormValue sup_norm_sampled(const Series& f, const Domain& d, int samples = 1000,
                           std::uint64_t seed = 0x5eedu);

// Chain linking the three norms on the oscillating (zero-average) part:
//   linf <= sup <= l1 <= (2n/sigma)^n linf(at s+sigma).
// Sound sub-checks performed:
//   (1) sampled sup <= l1 upper bound
//   (2) linf upper bound <= l1 upper bound (same per-mode bounds, max vs sum)
//   (3) l1 at s <= (2n/sigma)^n * linf at s+sigma (combinatorial, per-mode)
bool norm_comparison_check(const Series& f, const Domain& d, double sigma,
                           std::vector<CheckResult>* out = nullptr);

// l1 norm of the high-mode part |k|_1 > N at angle width s-sigma is bounded
// by e^{-(N+1) sigma} times the l1 norm at width s
CheckResult tail_bound_check(const Series& f, const Domain& d, int N, double sigma);

// Cauchy estimates for derivatives:
//   sum_i l1(d_{x_i} f) at (r, s-sigma)  <=  l1(f)_{r,s} / (e sigma)
//   max_i l1(d_{y_i} f) at (r-rho, s)    <=  l1(f)_{r,s} / rho
// The per-term bound mechanism guarantees these hold for polynomial
// coefficients; rational coefficients may be conservative on the left.
bool cauchy_estimate_check(const Series& f, const Domain& d, double rho, double sigma,
                           std::vector<CheckResult>* out = nullptr);

// Bracket estimate: with f on (r0,s0), g on (r1,s1), rbar = min r, sbar = min s,
//   l1({f,g}) at (rbar-rho, sbar-sigma)
//     <= (1/e) [ 1/((r0-rbar+rho)(s1-sbar+sigma))
//              + 1/((r1-rbar+rho)(s0-sbar+sigma)) ] l1(f) l1(g).
// Both domains must share the same base balls.
bool bracket_norm_bound_check(const Series& f, const Series& g, const Domain& df,
                              const Domain& dg, double rho, double sigma,
                              std::vector<CheckResult>* out = nullptr);

}  // namespace resavg

#endif
