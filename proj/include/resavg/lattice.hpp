#ifndef RESAVG_LATTICE_HPP
#define RESAVG_LATTICE_HPP

// Integer-lattice utilities: generator enumeration for Z^n_* up to an order
// cutoff, Bezout completion of a vector to an integer matrix with
// det = gcd(k) and last row k, and the unimodular change-of-basis frame used
// by the resonance reduction.

#include <Eigen/Dense>
#include <vector>

#include "types.hpp"

namespace resavg {

using MatXi = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

// k != 0 (member of the punctured lattice)
bool is_zstar(const VectorXi& k);

// gcd of |components|, zeros ignored; 0 for the zero vector
long long vec_gcd(const VectorXi& k);

// gcd == 1 and first nonzero component positive
bool is_generator(const VectorXi& k);

// all generators with 0 < |k|_1 <= K, sorted by (|k|_1, lexicographic)
std::vector<VectorXi> generators_up_to(int n, int K);

// minimal-|x| solution of a x + b y = gcd(|a|,|b|); ties prefer y >= 0, then x > 0
struct BezoutPair {
  long long g, x, y;
};
BezoutPair bezout_pair(long long a, long long b);

// integer matrix with last row k and determinant gcd(k) (> 0).
// n == 1 requires k > 0 (no such matrix exists for k < 0).
MatXi bezout_matrix(const VectorXi& k);

// exact integer determinant (fraction-free elimination)
long long int_det(const MatXi& A);

struct UnimodularFrame {
  MatXi A;     // det 1, last row k
  MatXi Ainv;  // exact integer inverse
};

// requires gcd(k) == 1
UnimodularFrame resonance_frame(const VectorXi& k);

// true if l is an integer multiple of k (including 0 and negatives)
bool is_multiple_of(const VectorXi& k, const VectorXi& l);

}  // namespace resavg

#endif
