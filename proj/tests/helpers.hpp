#ifndef RESAVG_TEST_HELPERS_HPP
#define RESAVG_TEST_HELPERS_HPP

// Shared builders for the unit tests: reproducible random series with
// conjugate-paired coefficients and exact comparison of polynomial series.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "resavg/rng.hpp"
#include "resavg/series.hpp"

namespace resavg::testing {

// zero-average real series with modes 0 < |k|_1 <= maxL1, coefficients
// polynomial in y up to degree maxDeg, scaled by e^{-|k|_1 s}
inline Series random_real_series(int n, int maxL1, int maxDeg, double s,
                                 std::uint64_t seed) {
  SplitMix64 rng(seed);
  Series f(n, true);
  std::vector<VectorXi> modes;
  VectorXi k = VectorXi::Zero(n);
  // enumerate half of the modes (first nonzero positive); pair below
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      for (int j = 0; j < n; ++j) {
        if (k[j] > 0) { modes.push_back(k); break; }
        if (k[j] < 0) break;
      }
      return;
    }
    for (int v = -(maxL1 - used); v <= maxL1 - used; ++v) {
      k[i] = v;
      rec(i + 1, used + std::abs(v));
    }
    k[i] = 0;
  };
  rec(0, 0);

  for (const VectorXi& m : modes) {
    if (rng.next_double() < 0.35) continue;  // keep the support sparse
    YPoly p;
    int terms = 1 + int(rng.next_double() * 2.5);
    for (int t = 0; t < terms; ++t) {
      VectorXi deg = VectorXi::Zero(n);
      int total = int(rng.next_double() * (maxDeg + 1));
      for (int d = 0; d < total; ++d) deg[int(rng.next_double() * n)] += 1;
      p.add_term(YPoly::pack(deg), rng.unit_disk());
    }
    if (p.is_zero()) continue;
    double w = std::exp(-m.lpNorm<1>() * s);
    YPoly fwd, bwd;
    for (const auto& [deg, c] : p.terms()) {
      fwd.add_term(deg, c * w);
      bwd.add_term(deg, std::conj(c) * w);
    }
    f.set_coeff(m, fwd);
    f.set_coeff(VectorXi(-m), bwd);
  }
  return f;
}

// exact structural equality for polynomial-coefficient series
inline bool series_equal_exact(const Series& a, const Series& b) {
  if (a.dim() != b.dim()) return false;
  auto ma = a.sorted_modes(), mb = b.sorted_modes();
  if (ma != mb) return false;
  for (ModeKey m : ma) {
    const YPoly pa = a.find(m)->as_poly();
    const YPoly pb = b.find(m)->as_poly();
    if (!(pa == pb)) return false;
  }
  return true;
}

}  // namespace resavg::testing

#endif
