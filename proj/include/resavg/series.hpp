#ifndef RESAVG_SERIES_HPP
#define RESAVG_SERIES_HPP

// Sparse Fourier series in the angles with coefficients that are sums of
// rational terms  c * num(y) / prod_t p_t(y)^{e_t}.  The denominator factors
// p_t are the small divisors produced by homological solves; they are
// interned in an AlgebraContext together with a certified positive lower
// bound, so norm evaluation stays both cheap and sound. A plain polynomial
// series has every den id = 0 and needs no context.
//
// Coefficients are complex doubles and are pruned on exact zero only; IEEE
// underflow is the one truncation mechanism besides the explicitly accounted
// Lie-series tails (tracked in Series::discarded).

#include <array>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "domain.hpp"
#include "types.hpp"
#include "ypoly.hpp"

namespace resavg {

struct DivisorTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class AlgebraContext {
 public:
  explicit AlgebraContext(int n) : n_(n) { dens_.push_back({}); }

  int dim() const { return n_; }

  // intern a divisor polynomial with its certified lower bound (valid on
  // every domain this context will ever be asked about; callers only shrink)
  std::uint32_t intern_factor(const YPoly& p, double certifiedLower);

  // den ids: 0 is the empty product (= 1)
  std::uint32_t den_mul_factor(std::uint32_t den, std::uint32_t factorId);
  std::uint32_t den_mul(std::uint32_t a, std::uint32_t b);

  double factor_lower(std::uint32_t f, const Domain& d);
  double den_lower(std::uint32_t den, const Domain& d);
  cplx den_eval(std::uint32_t den, const VectorXcd& y) const;
  YPoly den_dfactor(std::uint32_t factorId, int j) const { return factors_[factorId].p.dy(j); }

  const std::vector<std::pair<std::uint32_t, std::uint16_t>>& den(std::uint32_t id) const {
    return dens_[id];
  }
  const YPoly& factor(std::uint32_t id) const { return factors_[id].p; }
  double factor_certified(std::uint32_t id) const { return factors_[id].certified; }
  std::size_t num_factors() const { return factors_.size(); }

 private:
  struct Factor {
    YPoly p;
    std::array<YPoly, kMaxDim> dp;
    double certified;                         // floor from the zone certificate
    std::vector<std::pair<std::uint64_t, double>> lowerCache;  // domain hash -> lower
  };
  static std::uint64_t domain_hash(const Domain& d);
  std::uint32_t intern_den(std::vector<std::pair<std::uint32_t, std::uint16_t>> f);

  int n_;
  std::vector<Factor> factors_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint16_t>>> dens_;
  std::unordered_map<std::uint64_t, std::uint32_t> denPairCache_;  // (a,b) -> a*b
  std::unordered_map<std::uint64_t, std::uint32_t> denFacCache_;   // (den,f) -> den*f
  std::unordered_map<std::uint64_t, std::uint32_t> denIndex_;      // content hash -> id
};

// one rational term: c * num(y) / den; empty num means 1
struct RTerm {
  cplx c;
  std::uint32_t den = 0;
  YPoly num;
};

struct Coeff {
  std::vector<RTerm> t;

  bool is_zero() const { return t.empty(); }
  bool is_poly() const;
  YPoly as_poly() const;  // requires all den == 0

  // merge-aware accumulation: constant-numerator terms with the same den
  // coalesce immediately so the bracket kernel never grows garbage
  void add(cplx c, std::uint32_t den, const YPoly* num);
  void add_scaled(const Coeff& o, cplx s);
  void prune();  // drop exact zeros

  cplx eval(const VectorXcd& y, const AlgebraContext* ctx) const;
  double bound_dom(const Domain& d, AlgebraContext* ctx) const;
  Coeff dy(int j, AlgebraContext* ctx) const;
  Coeff mul(const Coeff& o, AlgebraContext* ctx) const;
};

class Series;
using ContextPtr = std::shared_ptr<AlgebraContext>;

class Series {
 public:
  Series() = default;
  Series(int n, bool reality) : n_(n), real_(reality) { check_dim(n); }

  int dim() const { return n_; }
  bool reality() const { return real_; }
  void set_reality(bool r) { real_ = r; }

  const ContextPtr& context() const { return ctx_; }
  void set_context(ContextPtr c);

  std::size_t num_modes() const { return c_.size(); }
  bool empty() const { return c_.empty(); }

  const Coeff* find(ModeKey k) const;
  Coeff& at(ModeKey k) { return c_[k]; }
  void set_coeff(const VectorXi& k, const YPoly& p);
  void set_coeff(const VectorXi& k, cplx v);
  void add_coeff(ModeKey k, const Coeff& add, cplx scale = 1.0);
  void prune();

  // sorted snapshot of the support (determinism: every reduction walks this)
  std::vector<ModeKey> sorted_modes() const;

  // structural checks
  void check_reality(double tol) const;  // coeff(-k) == conj(coeff(k))

  cplx evaluate(const VectorXcd& y, const VectorXd& xRe, const VectorXd& xIm) const;
  cplx evaluate(const VectorXcd& y, const VectorXcd& x) const;

  double discarded = 0;  // l1-norm ledger of dropped tails on the current domain

  auto begin() const { return c_.begin(); }
  auto end() const { return c_.end(); }

 private:
  int n_ = 0;
  bool real_ = false;
  ContextPtr ctx_;
  std::unordered_map<ModeKey, Coeff, ModeKeyHash> c_;
};

// ---- free operations ----

Series series_add(const Series& a, const Series& b, cplx sb = 1.0);
Series series_scale(const Series& a, cplx s);
Series series_mul(const Series& a, const Series& b);

// lattice projectors: Lambda = {0} (angle average) or Z k (a resonance line)
struct LatticeSpec {
  enum Kind { Zero, Line } kind = Zero;
  VectorXi k;
  static LatticeSpec zero() { return {Zero, {}}; }
  static LatticeSpec line(const VectorXi& k) { return {Line, k}; }
  bool contains(ModeKey m, int n) const;
};

Series project_lattice(const Series& f, const LatticeSpec& lam);
Series project_lattice_complement(const Series& f, const LatticeSpec& lam);
Series truncate(const Series& f, int N);             // keep |m|_1 <= N
Series truncate_complement(const Series& f, int N);  // keep |m|_1 > N

// F^k: collect modes j*k into a one-angle series in theta = k.x
Series one_d_projection(const Series& f, const VectorXi& k);

// split a zero-average series into generator components (k, F^k with F^k_0 = 0)
struct GeneratorComponent {
  VectorXi k;
  Series Fk;  // one-angle
};
std::vector<GeneratorComponent> decompose_generators(const Series& f);

Series derivative_y(const Series& f, int j);
Series derivative_x(const Series& f, int j);

// {u, v} = i sum_{m,m'} [u_m (m . grad v_{m'}) - v_{m'} (m' . grad u_m)] e^{i(m+m')x}
Series poisson_bracket(const Series& u, const Series& v);

}  // namespace resavg

#endif
