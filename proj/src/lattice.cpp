#include "resavg/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace resavg {

bool is_zstar(const VectorXi& k) { return k.size() > 0 && !k.isZero(); }

long long vec_gcd(const VectorXi& k) {
  long long g = 0;
  for (int i = 0; i < k.size(); ++i) g = std::gcd(g, (long long)std::abs(k[i]));
  return g;
}

bool is_generator(const VectorXi& k) {
  if (!is_zstar(k) || vec_gcd(k) != 1) return false;
  for (int i = 0; i < k.size(); ++i) {
    if (k[i] != 0) return k[i] > 0;
  }
  return false;
}

std::vector<VectorXi> generators_up_to(int n, int K) {
  std::vector<VectorXi> out;
  VectorXi k(n);
  // enumerate the |k|_1 <= K box depth-first
  auto rec = [&](auto&& self, int pos, int budget) -> void {
    if (pos == n) {
      if (is_generator(k)) out.push_back(k);
      return;
    }
    for (int c = -budget; c <= budget; ++c) {
      k[pos] = c;
      self(self, pos + 1, budget - std::abs(c));
    }
  };
  rec(rec, 0, K);
  std::sort(out.begin(), out.end(), [](const VectorXi& a, const VectorXi& b) {
    int la = l1_norm(a), lb = l1_norm(b);
    if (la != lb) return la < lb;
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
  });
  return out;
}

BezoutPair bezout_pair(long long a, long long b) {
  if (a == 0 && b == 0) throw std::domain_error("bezout_pair(0,0)");
  if (b == 0) return {std::abs(a), a > 0 ? 1 : -1, 0};
  if (a == 0) return {std::abs(b), 0, b > 0 ? 1 : -1};
  // extended Euclid on |a|,|b|, then restore signs
  long long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  long long r0 = std::abs(a), r1 = std::abs(b);
  while (r1 != 0) {
    long long q = r0 / r1;
    std::tie(r0, r1) = std::make_tuple(r1, r0 - q * r1);
    std::tie(x0, x1) = std::make_tuple(x1, x0 - q * x1);
    std::tie(y0, y1) = std::make_tuple(y1, y0 - q * y1);
  }
  long long g = r0;
  long long xs = (a > 0 ? x0 : -x0), ys = (b > 0 ? y0 : -y0);
  // all solutions: x = xs + t*(b/g), y = ys - t*(a/g); scan around t* = -xs/(b/g)
  long long bs = b / g, as = a / g;
  long long tc = (bs != 0) ? -xs / bs : 0;
  BezoutPair best{0, 0, 0};
  bool have = false;
  for (long long t = tc - 2; t <= tc + 2; ++t) {
    long long x = xs + t * bs, y = ys - t * as;
    auto better = [&](const BezoutPair& c) {
      if (!have) return true;
      auto key = [](const BezoutPair& p) {
        return std::make_tuple(std::abs(p.x), p.y < 0 ? 1 : 0, p.x <= 0 ? 1 : 0);
      };
      return key(c) < key(best);
    };
    BezoutPair cand{g, x, y};
    if (better(cand)) best = cand, have = true;
  }
  return best;
}

namespace {

MatXi bezout_rec(const VectorXi& k) {
  const int n = static_cast<int>(k.size());
  if (n == 1) {
    if (k[0] <= 0)
      throw std::domain_error("bezout_matrix: n = 1 requires k > 0 (det = gcd impossible otherwise)");
    MatXi A(1, 1);
    A(0, 0) = k[0];
    return A;
  }
  VectorXi kbar = k.head(n - 1);
  if (kbar.isZero()) {
    // k = (0,...,0,kn): identity block, sign fixed so det = |kn|
    MatXi A = MatXi::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) A(i, i) = 1;
    A(n - 1, n - 1) = k[n - 1];
    if (k[n - 1] < 0) A(0, 0) = -1;
    return A;
  }
  if (n == 2) {
    // solve k1 x + k2 y = d; top row (y, -x)
    BezoutPair p = bezout_pair(k[0], k[1]);
    MatXi A(2, 2);
    A << p.y, -p.x, k[0], k[1];
    return A;
  }
  MatXi Abar = bezout_rec(kbar);
  long long dbar = vec_gcd(kbar);
  BezoutPair p = bezout_pair(dbar, k[n - 1]);
  long long sgn = (n % 2 == 0) ? 1 : -1;  // (-1)^n
  MatXi A = MatXi::Zero(n, n);
  for (int j = 0; j < n - 1; ++j) A(0, j) = sgn * p.y * (long long)kbar[j] / dbar;
  A(0, n - 1) = -sgn * p.x;  // (-1)^{n+1} x
  for (int i = 0; i + 2 < n; ++i)
    for (int j = 0; j < n - 1; ++j) A(i + 1, j) = Abar(i, j);
  for (int j = 0; j < n - 1; ++j) A(n - 1, j) = k[j];
  A(n - 1, n - 1) = k[n - 1];
  return A;
}

}  // namespace

long long int_det(const MatXi& A) {
  // Bareiss fraction-free elimination; exact in int64 for the sizes used here
  const int n = static_cast<int>(A.rows());
  MatXi M = A;
  long long sign = 1, prev = 1;
  for (int c = 0; c < n - 1; ++c) {
    if (M(c, c) == 0) {
      int p = -1;
      for (int r = c + 1; r < n; ++r)
        if (M(r, c) != 0) {
          p = r;
          break;
        }
      if (p < 0) return 0;
      M.row(c).swap(M.row(p));
      sign = -sign;
    }
    for (int r = c + 1; r < n; ++r)
      for (int j = c + 1; j < n; ++j)
        M(r, j) = (M(r, j) * M(c, c) - M(r, c) * M(c, j)) / prev;
    prev = M(c, c);
  }
  return sign * M(n - 1, n - 1);
}

MatXi bezout_matrix(const VectorXi& k) {
  if (!is_zstar(k)) throw std::domain_error("bezout_matrix: k must be nonzero");
  MatXi A = bezout_rec(k);
  long long g = vec_gcd(k);
  if (int_det(A) == -g) A.row(0) = -A.row(0);  // orientation fix, preserves last row and |A|_inf
  return A;
}

UnimodularFrame resonance_frame(const VectorXi& k) {
  if (vec_gcd(k) != 1) throw std::domain_error("resonance_frame: gcd(k) must be 1");
  const int n = static_cast<int>(k.size());
  UnimodularFrame F;
  F.A = bezout_matrix(k);
  // adjugate / det with det = +1
  F.Ainv = MatXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      MatXi m(n - 1, n - 1);
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          m(rr, cc++) = F.A(r, c);
        }
        ++rr;
      }
      long long cof = ((i + j) % 2 ? -1 : 1) * (n == 1 ? 1 : int_det(m));
      F.Ainv(i, j) = cof;
    }
  if (!(F.A * F.Ainv).isIdentity())
    throw std::logic_error("resonance_frame: inverse check failed");
  return F;
}

bool is_multiple_of(const VectorXi& k, const VectorXi& l) {
  // find the ratio from the first nonzero of k
  int i0 = -1;
  for (int i = 0; i < k.size(); ++i)
    if (k[i] != 0) {
      i0 = i;
      break;
    }
  if (i0 < 0) return l.isZero();
  if (l[i0] % k[i0] != 0) return false;
  int j = l[i0] / k[i0];
  return (l - j * k).isZero();
}

}  // namespace resavg
