#include "resavg/ypoly.hpp"

#include <algorithm>
#include <cmath>

namespace resavg {

std::uint32_t YPoly::pack(const VectorXi& deg) {
  check_dim(int(deg.size()));
  std::uint32_t v = 0;
  for (int i = 0; i < deg.size(); ++i) {
    if (deg[i] < 0 || deg[i] > 255) throw std::overflow_error("YPoly degree out of range");
    v |= std::uint32_t(deg[i]) << (8 * i);
  }
  return v;
}

VectorXi YPoly::unpack(std::uint32_t d, int n) {
  VectorXi deg(n);
  for (int i = 0; i < n; ++i) deg[i] = int((d >> (8 * i)) & 0xffu);
  return deg;
}

YPoly YPoly::constant(cplx c) {
  YPoly p;
  if (c != 0.0) p.t_.push_back({0u, c});
  return p;
}

YPoly YPoly::monomial(const VectorXi& deg, cplx c) {
  YPoly p;
  if (c != 0.0) p.t_.push_back({pack(deg), c});
  return p;
}

bool YPoly::is_constant() const {
  return t_.empty() || (t_.size() == 1 && t_[0].first == 0u);
}

cplx YPoly::constant_value() const { return t_.empty() ? cplx(0) : t_[0].second; }

int YPoly::degree() const {
  int d = -1;
  for (auto& [k, c] : t_) {
    int s = 0;
    for (int i = 0; i < 4; ++i) s += int((k >> (8 * i)) & 0xffu);
    d = std::max(d, s);
  }
  return d;
}

void YPoly::add_term(std::uint32_t deg, cplx c) {
  auto it = std::lower_bound(t_.begin(), t_.end(), deg,
                             [](const Term& t, std::uint32_t d) { return t.first < d; });
  if (it != t_.end() && it->first == deg) {
    it->second += c;
    if (it->second == 0.0) t_.erase(it);
  } else if (c != 0.0) {
    t_.insert(it, {deg, c});
  }
}

YPoly& YPoly::operator+=(const YPoly& o) {
  for (auto& [d, c] : o.t_) add_term(d, c);
  return *this;
}

YPoly& YPoly::operator*=(cplx s) {
  if (s == 0.0) {
    t_.clear();
    return *this;
  }
  for (auto& t : t_) t.second *= s;
  return *this;
}

YPoly operator*(const YPoly& a, const YPoly& b) {
  YPoly r;
  for (auto& [da, ca] : a.t_)
    for (auto& [db, cb] : b.t_) r.add_term(da + db, ca * cb);  // lanes can't carry at our degrees
  return r;
}

YPoly YPoly::dy(int j) const {
  YPoly r;
  for (auto& [d, c] : t_) {
    int e = int((d >> (8 * j)) & 0xffu);
    if (e == 0) continue;
    r.add_term(d - (1u << (8 * j)), c * double(e));
  }
  return r;
}

cplx YPoly::eval(const VectorXcd& y) const {
  cplx s = 0;
  for (auto& [d, c] : t_) {
    cplx m = c;
    for (int i = 0; i < y.size(); ++i) {
      int e = int((d >> (8 * i)) & 0xffu);
      for (int q = 0; q < e; ++q) m *= y[i];
    }
    s += m;
  }
  return s;
}

cplx YPoly::eval(const VectorXd& y) const {
  VectorXcd yc = y.cast<cplx>();
  return eval(yc);
}

YPoly YPoly::recenter(const VectorXd& c, int n) const {
  // p(c + u) expanded in u, one monomial at a time (binomial products)
  YPoly out;
  for (auto& [d, coef] : t_) {
    YPoly m = YPoly::constant(coef);
    for (int i = 0; i < n; ++i) {
      int e = int((d >> (8 * i)) & 0xffu);
      if (e == 0) continue;
      YPoly lin;  // (c_i + u_i)
      lin.add_term(0u, cplx(c[i]));
      lin.add_term(1u << (8 * i), cplx(1.0));
      for (int q = 0; q < e; ++q) m = m * lin;
    }
    out += m;
  }
  return out;
}

namespace {
// split a recentered poly into |const|, Euclidean norm of the linear part,
// and sum over |beta| >= 2 of |q_beta| rad^{|beta|}
void ball_parts(const YPoly& q, double rad, double& c0, double& lin2, double& hi) {
  c0 = lin2 = hi = 0;
  double lin_sq = 0;
  for (auto& [d, c] : q.terms()) {
    int tot = 0, nz = -1;
    bool deg1 = false;
    for (int i = 0; i < 4; ++i) {
      int e = int((d >> (8 * i)) & 0xffu);
      tot += e;
      if (e) nz = i;
    }
    deg1 = (tot == 1);
    (void)nz;
    if (tot == 0)
      c0 = std::abs(c);
    else if (deg1)
      lin_sq += std::norm(c);
    else
      hi += std::abs(c) * std::pow(rad, tot);
  }
  lin2 = std::sqrt(lin_sq) * rad;
}
}  // namespace

double YPoly::bound_ball(const VectorXd& c, double rad, int n) const {
  YPoly q = recenter(c, n);
  double c0, lin, hi;
  ball_parts(q, rad, c0, lin, hi);
  return c0 + lin + hi;
}

double YPoly::lower_ball(const VectorXd& c, double rad, int n) const {
  YPoly q = recenter(c, n);
  double c0, lin, hi;
  ball_parts(q, rad, c0, lin, hi);
  return c0 - lin - hi;
}

double YPoly::bound_dom(const Domain& d) const {
  double b = 0;
  for (auto& bl : d.balls) b = std::max(b, bound_ball(bl.c, bl.R + d.r, d.dim()));
  return b;
}

double YPoly::lower_dom(const Domain& d) const {
  double b = std::numeric_limits<double>::infinity();
  for (auto& bl : d.balls) b = std::min(b, lower_ball(bl.c, bl.R + d.r, d.dim()));
  return b;
}

}  // namespace resavg
