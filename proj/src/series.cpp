#include "resavg/series.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "resavg/lattice.hpp"

namespace resavg {

// ---------- AlgebraContext ----------

namespace {
std::uint64_t fnv64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
  auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}
}  // namespace

std::uint64_t AlgebraContext::domain_hash(const Domain& d) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto& b : d.balls) {
    h = fnv64(b.c.data(), sizeof(double) * b.c.size(), h);
    h = fnv64(&b.R, sizeof(double), h);
  }
  h = fnv64(&d.r, sizeof(double), h);  // s does not affect y-bounds
  return h;
}

std::uint32_t AlgebraContext::intern_factor(const YPoly& p, double certifiedLower) {
  if (!(certifiedLower > 0))
    throw DivisorTooSmall("intern_factor: certified lower bound must be positive");
  for (std::uint32_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].p == p) {
      factors_[i].certified = std::max(factors_[i].certified, certifiedLower);
      return i;
    }
  }
  Factor f;
  f.p = p;
  for (int j = 0; j < n_; ++j) f.dp[j] = p.dy(j);
  f.certified = certifiedLower;
  factors_.push_back(std::move(f));
  return std::uint32_t(factors_.size() - 1);
}

std::uint32_t AlgebraContext::intern_den(
    std::vector<std::pair<std::uint32_t, std::uint16_t>> f) {
  std::sort(f.begin(), f.end());
  std::uint64_t h = fnv64(f.data(), f.size() * sizeof(f[0]));
  auto [it, fresh] = denIndex_.try_emplace(h, 0);
  if (!fresh && dens_[it->second] == f) return it->second;
  if (!fresh) {
    // hash collision with different content: linear fallback
    for (std::uint32_t i = 0; i < dens_.size(); ++i)
      if (dens_[i] == f) return i;
  }
  dens_.push_back(std::move(f));
  it->second = std::uint32_t(dens_.size() - 1);
  return it->second;
}

std::uint32_t AlgebraContext::den_mul_factor(std::uint32_t den, std::uint32_t factorId) {
  std::uint64_t key = (std::uint64_t(den) << 32) | factorId;
  auto it = denFacCache_.find(key);
  if (it != denFacCache_.end()) return it->second;
  auto f = dens_[den];
  bool found = false;
  for (auto& [id, e] : f)
    if (id == factorId) {
      ++e;
      found = true;
      break;
    }
  if (!found) f.push_back({factorId, 1});
  std::uint32_t r = intern_den(std::move(f));
  denFacCache_.emplace(key, r);
  return r;
}

std::uint32_t AlgebraContext::den_mul(std::uint32_t a, std::uint32_t b) {
  if (a == 0) return b;
  if (b == 0) return a;
  std::uint64_t key = (std::uint64_t(a) << 32) | b;
  auto it = denPairCache_.find(key);
  if (it != denPairCache_.end()) return it->second;
  auto f = dens_[a];
  for (auto& [id, e] : dens_[b]) {
    bool found = false;
    for (auto& [id2, e2] : f)
      if (id2 == id) {
        e2 = std::uint16_t(e2 + e);
        found = true;
        break;
      }
    if (!found) f.push_back({id, e});
  }
  std::uint32_t r = intern_den(std::move(f));
  denPairCache_.emplace(key, r);
  return r;
}

double AlgebraContext::factor_lower(std::uint32_t fid, const Domain& d) {
  Factor& f = factors_[fid];
  std::uint64_t h = domain_hash(d);
  for (auto& [k, v] : f.lowerCache)
    if (k == h) return v;
  double analytic = f.p.lower_dom(d);
  double v = std::max(f.certified, analytic);
  f.lowerCache.push_back({h, v});
  return v;
}

double AlgebraContext::den_lower(std::uint32_t den, const Domain& d) {
  double v = 1;
  for (auto& [id, e] : dens_[den]) {
    double fl = factor_lower(id, d);
    for (int q = 0; q < e; ++q) v *= fl;
  }
  return v;
}

cplx AlgebraContext::den_eval(std::uint32_t den, const VectorXcd& y) const {
  cplx v = 1;
  for (auto& [id, e] : dens_[den]) {
    cplx fv = factors_[id].p.eval(y);
    for (int q = 0; q < e; ++q) v *= fv;
  }
  return v;
}

// ---------- Coeff ----------

bool Coeff::is_poly() const {
  for (auto& r : t)
    if (r.den != 0) return false;
  return true;
}

YPoly Coeff::as_poly() const {
  YPoly p;
  for (auto& r : t) {
    if (r.den != 0) throw std::logic_error("Coeff::as_poly on rational coefficient");
    if (r.num.is_zero())
      p.add_term(0u, r.c);
    else {
      YPoly q = r.num;
      q *= r.c;
      p += q;
    }
  }
  return p;
}

void Coeff::add(cplx c, std::uint32_t den, const YPoly* num) {
  if (c == 0.0) return;
  if (num && num->is_constant()) {  // fold constants into the scalar
    c *= num->constant_value();
    if (c == 0.0) return;
    num = nullptr;
  }
  // canonical form: at most one term per denominator, so algebraic
  // cancellations happen structurally and norms stay honest
  for (auto& r : t) {
    if (r.den != den) continue;
    if (r.num.is_zero() && !num) {
      r.c += c;
      return;
    }
    YPoly incoming;  // copy first: num may alias into this coefficient
    if (num) {
      incoming = *num;
      incoming *= c;
    } else {
      incoming.add_term(0u, c);
    }
    if (r.num.is_zero()) {
      if (r.c != 0.0) r.num.add_term(0u, r.c);
    } else if (r.c != 1.0) {
      r.num *= r.c;
    }
    r.c = 1.0;
    r.num += incoming;
    if (r.num.is_constant()) {  // collapsed back to a scalar (possibly zero)
      r.c = r.num.constant_value();
      r.num = YPoly{};
    }
    return;
  }
  t.push_back({c, den, num ? *num : YPoly{}});
}

void Coeff::add_scaled(const Coeff& o, cplx s) {
  for (auto& r : o.t) add(s * r.c, r.den, r.num.is_zero() ? nullptr : &r.num);
}

void Coeff::prune() {
  std::erase_if(t, [](const RTerm& r) { return r.num.is_zero() && r.c == 0.0; });
}

cplx Coeff::eval(const VectorXcd& y, const AlgebraContext* ctx) const {
  cplx s = 0;
  for (auto& r : t) {
    cplx v = r.c;
    if (!r.num.is_zero()) v *= r.num.eval(y);
    if (r.den != 0) {
      if (!ctx) throw std::logic_error("rational coefficient without context");
      v /= ctx->den_eval(r.den, y);
    }
    s += v;
  }
  return s;
}

double Coeff::bound_dom(const Domain& d, AlgebraContext* ctx) const {
  double s = 0;
  for (auto& r : t) {
    double v = std::abs(r.c);
    if (!r.num.is_zero()) v *= r.num.bound_dom(d);
    if (r.den != 0) {
      if (!ctx) throw std::logic_error("rational coefficient without context");
      v /= ctx->den_lower(r.den, d);
    }
    s += v;
  }
  return s;
}

Coeff Coeff::dy(int j, AlgebraContext* ctx) const {
  Coeff out;
  for (auto& r : t) {
    if (!r.num.is_zero()) {
      YPoly dn = r.num.dy(j);
      if (!dn.is_zero()) out.add(r.c, r.den, &dn);
    }
    if (r.den != 0) {
      for (auto& [fid, e] : ctx->den(r.den)) {
        YPoly dp = ctx->den_dfactor(fid, j);
        if (dp.is_zero()) continue;
        std::uint32_t dnew = ctx->den_mul_factor(r.den, fid);
        if (r.num.is_zero()) {
          if (dp.is_constant())
            out.add(-double(e) * r.c * dp.constant_value(), dnew, nullptr);
          else
            out.add(-double(e) * r.c, dnew, &dp);
        } else {
          if (dp.is_constant())
            out.add(-double(e) * r.c * dp.constant_value(), dnew, &r.num);
          else {
            YPoly prod = r.num * dp;
            out.add(-double(e) * r.c, dnew, &prod);
          }
        }
      }
    }
  }
  return out;
}

Coeff Coeff::mul(const Coeff& o, AlgebraContext* ctx) const {
  Coeff out;
  for (auto& a : t)
    for (auto& b : o.t) {
      std::uint32_t den =
          (a.den && b.den) ? ctx->den_mul(a.den, b.den) : (a.den ? a.den : b.den);
      if (a.num.is_zero() && b.num.is_zero())
        out.add(a.c * b.c, den, nullptr);
      else if (a.num.is_zero())
        out.add(a.c * b.c, den, &b.num);
      else if (b.num.is_zero())
        out.add(a.c * b.c, den, &a.num);
      else {
        YPoly prod = a.num * b.num;
        out.add(a.c * b.c, den, &prod);
      }
    }
  return out;
}

// ---------- Series ----------

void Series::set_context(ContextPtr c) {
  if (ctx_ && c && ctx_ != c) throw std::logic_error("Series: mixing algebra contexts");
  if (c) ctx_ = std::move(c);
}

const Coeff* Series::find(ModeKey k) const {
  auto it = c_.find(k);
  return it == c_.end() ? nullptr : &it->second;
}

void Series::set_coeff(const VectorXi& k, const YPoly& p) {
  if (int(k.size()) != n_) throw std::invalid_argument("set_coeff: mode dimension mismatch");
  Coeff co;
  if (!p.is_zero()) co.add(1.0, 0, &p);
  if (co.is_zero())
    c_.erase(pack_mode(k));
  else
    c_[pack_mode(k)] = std::move(co);
}

void Series::set_coeff(const VectorXi& k, cplx v) { set_coeff(k, YPoly::constant(v)); }

void Series::add_coeff(ModeKey k, const Coeff& add, cplx scale) {
  auto& dst = c_[k];
  dst.add_scaled(add, scale);
  dst.prune();
  if (dst.is_zero()) c_.erase(k);
}

void Series::prune() {
  for (auto it = c_.begin(); it != c_.end();) {
    it->second.prune();
    if (it->second.is_zero())
      it = c_.erase(it);
    else
      ++it;
  }
}

std::vector<ModeKey> Series::sorted_modes() const {
  std::vector<ModeKey> ks;
  ks.reserve(c_.size());
  for (auto& [k, v] : c_) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  return ks;
}

void Series::check_reality(double tol) const {
  // sample a few real action points; reality means c(-k) = conj(c(k))
  VectorXcd y1 = VectorXcd::Zero(n_), y2(n_), y3(n_);
  for (int i = 0; i < n_; ++i) {
    y2[i] = 0.371 + 0.113 * i;
    y3[i] = -0.83 + 0.057 * i;
  }
  for (auto& [k, co] : c_) {
    const Coeff* mc = find(negate_mode(k, n_));
    for (const VectorXcd& y : {y1, y2, y3}) {
      cplx a = co.eval(y, ctx_.get());
      cplx b = mc ? mc->eval(y, ctx_.get()) : cplx(0);
      if (std::abs(a - std::conj(b)) > tol * (1.0 + std::abs(a)))
        throw std::logic_error("reality check failed");
    }
  }
}

cplx Series::evaluate(const VectorXcd& y, const VectorXcd& x) const {
  cplx s = 0;
  for (ModeKey k : sorted_modes()) {
    cplx ph = 0;
    for (int i = 0; i < n_; ++i) ph += double(mode_component(k, i)) * x[i];
    s += c_.at(k).eval(y, ctx_.get()) * std::exp(cplx(0, 1) * ph);
  }
  return s;
}

cplx Series::evaluate(const VectorXcd& y, const VectorXd& xRe, const VectorXd& xIm) const {
  VectorXcd x(n_);
  for (int i = 0; i < n_; ++i) x[i] = cplx(xRe[i], xIm[i]);
  return evaluate(y, x);
}

// ---------- free ops ----------

Series series_add(const Series& a, const Series& b, cplx sb) {
  if (a.dim() != b.dim()) throw std::invalid_argument("series_add: dimension mismatch");
  Series out = a;
  out.set_context(b.context());
  out.set_reality(a.reality() && b.reality() && sb.imag() == 0.0);
  for (auto& [k, co] : b) out.add_coeff(k, co, sb);
  out.discarded = a.discarded + std::abs(sb) * b.discarded;
  return out;
}

Series series_scale(const Series& a, cplx s) {
  Series out(a.dim(), a.reality() && s.imag() == 0.0);
  out.set_context(a.context());
  if (s == 0.0) return out;
  for (auto& [k, co] : a) out.add_coeff(k, co, s);
  out.discarded = std::abs(s) * a.discarded;
  return out;
}

Series series_mul(const Series& a, const Series& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("series_mul: dimension mismatch");
  Series out(a.dim(), a.reality() && b.reality());
  out.set_context(a.context());
  out.set_context(b.context());
  AlgebraContext* ctx = out.context().get();
  for (ModeKey ma : a.sorted_modes())
    for (ModeKey mb : b.sorted_modes())
      out.add_coeff(add_modes(ma, mb, a.dim()), a.find(ma)->mul(*b.find(mb), ctx));
  out.prune();
  return out;
}

bool LatticeSpec::contains(ModeKey m, int n) const {
  VectorXi v = unpack_mode(m, n);
  if (kind == Zero) return v.isZero();
  return is_multiple_of(k, v);
}

static Series filter(const Series& f, const std::function<bool(ModeKey)>& keep) {
  Series out(f.dim(), f.reality());
  out.set_context(f.context());
  for (auto& [k, co] : f)
    if (keep(k)) out.add_coeff(k, co);
  out.discarded = f.discarded;
  return out;
}

Series project_lattice(const Series& f, const LatticeSpec& lam) {
  return filter(f, [&](ModeKey m) { return lam.contains(m, f.dim()); });
}
Series project_lattice_complement(const Series& f, const LatticeSpec& lam) {
  return filter(f, [&](ModeKey m) { return !lam.contains(m, f.dim()); });
}
Series truncate(const Series& f, int N) {
  return filter(f, [&](ModeKey m) { return mode_l1(m, f.dim()) <= N; });
}
Series truncate_complement(const Series& f, int N) {
  return filter(f, [&](ModeKey m) { return mode_l1(m, f.dim()) > N; });
}

Series one_d_projection(const Series& f, const VectorXi& k) {
  if (!is_generator(k)) throw std::invalid_argument("one_d_projection: k must be a generator");
  Series out(1, f.reality());
  out.set_context(f.context());
  for (auto& [m, co] : f) {
    VectorXi v = unpack_mode(m, f.dim());
    if (!is_multiple_of(k, v)) continue;
    int i0 = 0;
    while (k[i0] == 0) ++i0;
    int j = v[i0] / k[i0];
    VectorXi jm(1);
    jm[0] = j;
    out.add_coeff(pack_mode(jm), co);
  }
  out.discarded = f.discarded;
  return out;
}

std::vector<GeneratorComponent> decompose_generators(const Series& f) {
  const int n = f.dim();
  const Coeff* c0 = f.find(ModeKey{0});
  if (c0 && !c0->is_zero())
    throw std::invalid_argument("decompose_generators: nonzero angular average");
  std::map<std::vector<int>, Series> comp;
  for (auto& [m, co] : f) {
    if (m == ModeKey{0}) continue;
    VectorXi v = unpack_mode(m, n);
    long long g = vec_gcd(v);
    VectorXi gen = v / int(g);
    int sign = 1;
    for (int i = 0; i < n; ++i)
      if (gen[i] != 0) {
        sign = gen[i] > 0 ? 1 : -1;
        break;
      }
    gen *= sign;
    int j = int(g) * sign;
    std::vector<int> key(gen.data(), gen.data() + n);
    auto it = comp.find(key);
    if (it == comp.end()) {
      Series s(1, f.reality());
      s.set_context(f.context());
      it = comp.emplace(key, std::move(s)).first;
    }
    VectorXi jm(1);
    jm[0] = j;
    it->second.add_coeff(pack_mode(jm), co);
  }
  std::vector<GeneratorComponent> out;
  for (auto& [key, s] : comp) {
    VectorXi k(n);
    for (int i = 0; i < n; ++i) k[i] = key[i];
    out.push_back({k, std::move(s)});
  }
  std::sort(out.begin(), out.end(), [](const GeneratorComponent& a, const GeneratorComponent& b) {
    if (l1_norm(a.k) != l1_norm(b.k)) return l1_norm(a.k) < l1_norm(b.k);
    return std::lexicographical_compare(a.k.data(), a.k.data() + a.k.size(), b.k.data(),
                                        b.k.data() + b.k.size());
  });
  return out;
}

Series derivative_y(const Series& f, int j) {
  Series out(f.dim(), f.reality());
  out.set_context(f.context());
  for (auto& [k, co] : f) {
    Coeff d = co.dy(j, f.context().get());
    if (!d.is_zero()) out.add_coeff(k, d);
  }
  return out;
}

Series derivative_x(const Series& f, int j) {
  Series out(f.dim(), false);
  out.set_context(f.context());
  for (auto& [k, co] : f) {
    int kj = mode_component(k, j);
    if (kj == 0) continue;
    out.add_coeff(k, co, cplx(0, double(kj)));
  }
  return out;
}

Series poisson_bracket(const Series& u, const Series& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("poisson_bracket: dimension mismatch");
  const int n = u.dim();
  if (&u == &v) {  // {u,u} = 0 exactly; don't leave rounding dust
    Series zero(n, u.reality());
    zero.set_context(u.context());
    return zero;
  }
  ContextPtr ctx = u.context() ? u.context() : v.context();
  if (u.context() && v.context() && u.context() != v.context())
    throw std::logic_error("poisson_bracket: mixing algebra contexts");
  AlgebraContext* cx = ctx.get();

  Series out(n, u.reality() && v.reality());
  out.set_context(ctx);

  // sorted snapshots with per-mode gradients (deterministic accumulation)
  struct Entry {
    ModeKey m;
    const Coeff* c;
    std::array<Coeff, kMaxDim> g;
  };
  auto snapshot = [&](const Series& s) {
    std::vector<Entry> es;
    es.reserve(s.num_modes());
    for (ModeKey m : s.sorted_modes()) {
      Entry e;
      e.m = m;
      e.c = s.find(m);
      for (int j = 0; j < n; ++j) e.g[j] = e.c->dy(j, cx);
      es.push_back(std::move(e));
    }
    return es;
  };
  std::vector<Entry> us = snapshot(u), vs = snapshot(v);

  const cplx I(0, 1);
  for (auto& eu : us)
    for (auto& ev : vs) {
      ModeKey key = add_modes(eu.m, ev.m, n);
      Coeff acc;
      for (int j = 0; j < n; ++j) {
        int muj = mode_component(eu.m, j);
        int mvj = mode_component(ev.m, j);
        if (muj != 0) {
          Coeff prod = eu.c->mul(ev.g[j], cx);
          acc.add_scaled(prod, I * double(muj));
        }
        if (mvj != 0) {
          Coeff prod = ev.c->mul(eu.g[j], cx);
          acc.add_scaled(prod, -I * double(mvj));
        }
      }
      if (!acc.is_zero()) out.add_coeff(key, acc);
    }
  out.prune();
  return out;
}

}  // namespace resavg
