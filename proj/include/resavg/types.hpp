#ifndef RESAVG_TYPES_HPP
#define RESAVG_TYPES_HPP

// Core aliases and the packed integer-mode key used by the sparse Fourier
// containers. The engine packs a mode k in Z^n (n <= 4) into one uint64 as
// four int16 lanes; component range +-32767 is far beyond any truncation
// order this code runs at.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace resavg {

using cplx = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr int kMaxDim = 4;

struct ModeKey {
  std::uint64_t v = 0;
  friend bool operator==(ModeKey a, ModeKey b) { return a.v == b.v; }
  friend bool operator<(ModeKey a, ModeKey b) { return a.v < b.v; }
};

inline void check_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw std::invalid_argument("series dimension must be in [1,4], got " + std::to_string(n));
}

inline ModeKey pack_mode(const VectorXi& k) {
  check_dim(static_cast<int>(k.size()));
  std::uint64_t v = 0;
  for (int i = 0; i < k.size(); ++i) {
    auto c = k[i];
    if (c < -32768 || c > 32767) throw std::overflow_error("mode component out of int16 range");
    v |= (static_cast<std::uint64_t>(static_cast<std::uint16_t>(static_cast<std::int16_t>(c)))
          << (16 * i));
  }
  return ModeKey{v};
}

inline VectorXi unpack_mode(ModeKey m, int n) {
  VectorXi k(n);
  for (int i = 0; i < n; ++i)
    k[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>((m.v >> (16 * i)) & 0xffffu));
  return k;
}

// Componentwise add without unpacking; valid because lanes never overflow at
// the orders we truncate to (checked in debug).
inline ModeKey add_modes(ModeKey a, ModeKey b, int n) {
  std::uint64_t r = 0;
  for (int i = 0; i < n; ++i) {
    auto ai = static_cast<std::int16_t>((a.v >> (16 * i)) & 0xffffu);
    auto bi = static_cast<std::int16_t>((b.v >> (16 * i)) & 0xffffu);
    int s = int(ai) + int(bi);
    r |= (static_cast<std::uint64_t>(static_cast<std::uint16_t>(static_cast<std::int16_t>(s)))
          << (16 * i));
  }
  return ModeKey{r};
}

inline ModeKey negate_mode(ModeKey a, int n) {
  std::uint64_t r = 0;
  for (int i = 0; i < n; ++i) {
    auto ai = static_cast<std::int16_t>((a.v >> (16 * i)) & 0xffffu);
    r |= (static_cast<std::uint64_t>(static_cast<std::uint16_t>(static_cast<std::int16_t>(-ai)))
          << (16 * i));
  }
  return ModeKey{r};
}

inline int mode_component(ModeKey m, int i) {
  return static_cast<std::int16_t>((m.v >> (16 * i)) & 0xffffu);
}

inline int mode_l1(ModeKey m, int n) {
  int s = 0;
  for (int i = 0; i < n; ++i) s += std::abs(mode_component(m, i));
  return s;
}

inline int l1_norm(const VectorXi& k) { return k.cwiseAbs().sum(); }
inline int linf_norm(const VectorXi& k) { return k.size() ? k.cwiseAbs().maxCoeff() : 0; }

struct ModeKeyHash {
  std::size_t operator()(ModeKey m) const {
    // splitmix64 finalizer; good avalanche for packed lanes
    std::uint64_t z = m.v + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

}  // namespace resavg

#endif
