#ifndef RESAVG_YPOLY_HPP
#define RESAVG_YPOLY_HPP

// Sparse polynomials in the action variable y in C^n, n <= 4. Terms are kept
// sorted by a packed multidegree (4 x 8 bits), coefficients are complex.
// These stay tiny (a handful of terms); all loops are linear scans.

#include <vector>

#include "domain.hpp"
#include "types.hpp"

namespace resavg {

class YPoly {
 public:
  using Term = std::pair<std::uint32_t, cplx>;

  YPoly() = default;
  static YPoly constant(cplx c);
  static YPoly monomial(const VectorXi& deg, cplx c);

  static std::uint32_t pack(const VectorXi& deg);
  static VectorXi unpack(std::uint32_t d, int n);

  bool is_zero() const { return t_.empty(); }
  bool is_constant() const;            // zero or a single degree-0 term
  cplx constant_value() const;         // value if is_constant()
  int degree() const;                  // total degree, -1 for zero

  void add_term(std::uint32_t deg, cplx c);
  YPoly& operator+=(const YPoly& o);
  YPoly& operator*=(cplx s);
  friend YPoly operator*(const YPoly& a, const YPoly& b);

  YPoly dy(int j) const;  // partial derivative
  cplx eval(const VectorXcd& y) const;
  cplx eval(const VectorXd& y) const;

  // sup / inf bounds on the complex ball |y - c| <= rad, via Taylor
  // recentering; degree-1 block uses Cauchy-Schwarz.
  double bound_ball(const VectorXd& c, double rad, int n) const;
  double lower_ball(const VectorXd& c, double rad, int n) const;

  // max over the domain's widened balls / min over them
  double bound_dom(const Domain& d) const;
  double lower_dom(const Domain& d) const;

  const std::vector<Term>& terms() const { return t_; }
  bool operator==(const YPoly& o) const { return t_ == o.t_; }

 private:
  YPoly recenter(const VectorXd& c, int n) const;  // p(c + u) as a poly in u
  std::vector<Term> t_;
};

}  // namespace resavg

#endif
