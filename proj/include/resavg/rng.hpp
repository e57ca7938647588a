#ifndef RESAVG_RNG_HPP
#define RESAVG_RNG_HPP

// Deterministic random sources. std:: distributions are implementation
// defined, so every sampled quantity in this project goes through these
// hand-rolled generators: identical seeds give identical streams on any
// conforming platform.

#include <cmath>
#include <cstdint>

#include "types.hpp"

namespace resavg {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next_u64() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in [0,1): 53 mantissa bits
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // uniform on the closed unit disk in C (area measure)
  cplx unit_disk() {
    double r = std::sqrt(next_double());
    double th = 2.0 * M_PI * next_double();
    return cplx(r * std::cos(th), r * std::sin(th));
  }

  // uniform in the real n-ball of radius R centered at c (rejection from cube)
  VectorXd ball(const VectorXd& c, double R) {
    const int n = static_cast<int>(c.size());
    VectorXd u(n);
    for (;;) {
      double q = 0;
      for (int i = 0; i < n; ++i) {
        u[i] = uniform(-1.0, 1.0);
        q += u[i] * u[i];
      }
      if (q <= 1.0) return c + R * u;
    }
  }

 private:
  std::uint64_t s_;
};

// Kronecker (additive golden-ratio family) low-discrepancy sequence on [0,1)^d.
// Used for the fixed quasi-random evaluation grids; fully deterministic.
class KroneckerSeq {
 public:
  KroneckerSeq(int dim, std::uint64_t salt) : dim_(dim) {
    // alpha_j from the generalized golden ratio ("harmonious numbers")
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dim + 1.0));
    double a = 1.0 / phi;
    alpha_.resize(dim);
    for (int j = 0; j < dim; ++j) alpha_[j] = std::pow(a, j + 1);
    SplitMix64 g(salt);
    shift_.resize(dim);
    for (int j = 0; j < dim; ++j) shift_[j] = g.next_double();
  }
  // point index i (0-based), coordinate j
  double coord(long i, int j) const {
    double x = shift_[j] + (double(i) + 1.0) * alpha_[j];
    return x - std::floor(x);
  }
  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<double> alpha_, shift_;
};

}  // namespace resavg

#endif
