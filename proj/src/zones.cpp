#include "resavg/zones.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "resavg/lattice.hpp"
#include "resavg/rng.hpp"

namespace resavg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_vec(const VectorXi& k) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ")";
  return os.str();
}

std::string fmt_vec(const VectorXd& w) {
  std::ostringstream os;
  os << std::setprecision(12) << "(";
  for (int i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << ")";
  return os.str();
}

double idot(const VectorXd& w, const VectorXi& k) {
  double s = 0;
  for (int i = 0; i < w.size(); ++i) s += w[i] * k[i];
  return s;
}

double cdot_abs(const VectorXcd& w, const VectorXi& k) {
  cplx s = 0;
  for (int i = 0; i < w.size(); ++i) s += w[i] * double(k[i]);
  return std::abs(s);
}

// w minus its component along k
VectorXd perp_part(const VectorXd& w, const VectorXi& k, double kn2) {
  VectorXd kd = k.cast<double>();
  return w - (idot(w, k) / kn2) * kd;
}

// visit every nonzero integer vector with |v|_1 <= K
template <class F>
void for_each_integer_mode(int n, int K, F&& fn) {
  VectorXi v = VectorXi::Zero(n);
  std::function<void(int, int)> rec = [&](int i, int rem) {
    if (i == n) {
      if (v.cwiseAbs().sum() != 0) fn(v);
      return;
    }
    for (int c = -rem; c <= rem; ++c) {
      v[i] = c;
      rec(i + 1, rem - std::abs(c));
    }
    v[i] = 0;
  };
  rec(0, K);
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

}  // namespace

void CoveringParams::validate(bool theoremLevel) const {
  if (!(alpha > 0) || !(M > 0) || !(L > 0) || !(Lbar > 0))
    throw std::invalid_argument("CoveringParams: alpha, M, L, Lbar must be positive");
  if (epsilon < 0) throw std::invalid_argument("CoveringParams: epsilon must be >= 0");
  if (K1 < 2 || K2 < K1)
    throw std::invalid_argument("CoveringParams: need K2 >= K1 >= 2");
  if (theoremLevel && K2 < 3 * K1)
    throw std::invalid_argument("CoveringParams: theorem-level hypotheses need K2 >= 3*K1");
}

VectorXd FrequencyMap::operator()(const VectorXd& y) const {
  VectorXd w(n);
  for (int j = 0; j < n; ++j) w[j] = grad[j].eval(y).real();
  return w;
}

VectorXcd FrequencyMap::eval(const VectorXcd& y) const {
  VectorXcd w(n);
  for (int j = 0; j < n; ++j) w[j] = grad[j].eval(y);
  return w;
}

FrequencyMap omega_of(const Series& h) {
  const int n = h.dim();
  YPoly hp;
  for (ModeKey m : h.sorted_modes()) {
    const Coeff* c = h.find(m);
    if (!c || c->is_zero()) continue;
    if (mode_l1(m, n) != 0)
      throw std::invalid_argument("omega_of: h depends on the angles");
    if (!c->is_poly())
      throw std::invalid_argument("omega_of: h must be polynomial in the actions");
    hp = c->as_poly();
  }
  FrequencyMap om;
  om.n = n;
  om.grad.resize(n);
  for (int j = 0; j < n; ++j) om.grad[j] = hp.dy(j);
  return om;
}

bool in_omega0(const VectorXd& w, const CoveringParams& p, Certificate* cert) {
  const int n = static_cast<int>(w.size());
  double best = kInf;
  VectorXi bestK = VectorXi::Zero(n);
  for (const VectorXi& k : generators_up_to(n, p.K1)) {
    double v = std::abs(idot(w, k));
    if (v < best) {
      best = v;
      bestK = k;
    }
  }
  bool ok = best > p.alpha / 2;
  if (cert) *cert = {"omega0", bestK, best, p.alpha / 2, ok};
  return ok;
}

bool in_omega1k(const VectorXd& w, const VectorXi& k, const CoveringParams& p,
                Certificate* cert) {
  const int n = static_cast<int>(w.size());
  if (k.size() != n) throw std::invalid_argument("in_omega1k: dimension mismatch");
  VectorXd kd = k.cast<double>();
  double kn2 = kd.squaredNorm();
  if (kn2 == 0) throw std::invalid_argument("in_omega1k: k must be nonzero");

  double wk = std::abs(idot(w, k));
  if (!(wk < p.alpha)) {
    if (cert) *cert = {"omega1k:resonant", k, wk, p.alpha, false};
    return false;
  }
  VectorXd perp = perp_part(w, k, kn2);
  double pn = perp.norm();
  if (!(pn < p.M)) {
    if (cert) *cert = {"omega1k:bounded", VectorXi::Zero(n), pn, p.M, false};
    return false;
  }
  double thr = 3.0 * p.alpha * p.K2 / std::sqrt(kn2);
  double best = kInf;
  VectorXi bestL = VectorXi::Zero(n);
  for (const VectorXi& l : generators_up_to(n, p.K2)) {
    if (is_multiple_of(k, l)) continue;
    double v = std::abs(idot(perp, l));
    if (v < best) {
      best = v;
      bestL = l;
    }
  }
  bool ok = best > thr;
  if (cert) *cert = {"omega1k:nonresonant", bestL, best, thr, ok};
  return ok;
}

bool in_omega2kl(const VectorXd& w, const VectorXi& k, const VectorXi& l,
                 const CoveringParams& p) {
  const int n = static_cast<int>(w.size());
  if (k.size() != n || l.size() != n)
    throw std::invalid_argument("in_omega2kl: dimension mismatch");
  if (is_multiple_of(k, l))
    throw std::invalid_argument("in_omega2kl: l must not be a multiple of k");
  VectorXd kd = k.cast<double>();
  double kn2 = kd.squaredNorm();
  if (kn2 == 0) throw std::invalid_argument("in_omega2kl: k must be nonzero");

  if (!(std::abs(idot(w, k)) < p.alpha)) return false;
  VectorXd perp = perp_part(w, k, kn2);
  if (!(perp.norm() < p.M)) return false;
  return std::abs(idot(perp, l)) <= 3.0 * p.alpha * p.K2 / std::sqrt(kn2);
}

ZoneReport classify_frequency(const VectorXd& w, const CoveringParams& p) {
  const int n = static_cast<int>(w.size());
  ZoneReport rep;
  rep.omega = w;

  Certificate c0;
  rep.inD0 = in_omega0(w, p, &c0);
  rep.certs.push_back(c0);

  const auto gens1 = generators_up_to(n, p.K1);
  const auto gens2 = generators_up_to(n, p.K2);

  for (const VectorXi& k : gens1) {
    Certificate c;
    if (in_omega1k(w, k, p, &c)) {
      rep.d1.push_back(k);
      rep.certs.push_back(c);
    }
  }

  for (const VectorXi& k : gens1) {
    double kn2 = k.cast<double>().squaredNorm();
    if (!(std::abs(idot(w, k)) < p.alpha)) continue;
    VectorXd perp = perp_part(w, k, kn2);
    if (!(perp.norm() < p.M)) continue;
    double thr = 3.0 * p.alpha * p.K2 / std::sqrt(kn2);
    for (const VectorXi& l : gens2) {
      if (is_multiple_of(k, l)) continue;
      if (std::abs(idot(perp, l)) <= thr) {
        ++rep.d2Count;
        if (rep.d2.size() < 8) rep.d2.emplace_back(k, l);
      }
    }
  }

  if (!rep.inD0 && rep.d1.empty() && rep.d2Count == 0)
    throw CoveringGap("no zone membership for frequency " + fmt_vec(w));
  return rep;
}

ZoneReport classify(const VectorXd& y, const Series& h, const CoveringParams& p) {
  FrequencyMap om = omega_of(h);
  ZoneReport rep = classify_frequency(om(y), p);
  rep.y = y;
  return rep;
}

bool verify_nonresonance(const ZoneReport& rep, const CoveringParams& p,
                         std::vector<CheckResult>* out) {
  const VectorXd& w = rep.omega;
  const int n = static_cast<int>(w.size());
  bool all = true;
  auto push = [&](CheckResult c) {
    all = all && c.pass;
    if (out) out->push_back(std::move(c));
  };

  if (rep.inD0) {
    double lo = kInf;
    for_each_integer_mode(n, p.K1, [&](const VectorXi& k) {
      lo = std::min(lo, std::abs(idot(w, k)));
    });
    push({"nonres_D0", lo, p.alpha / 2, lo >= p.alpha / 2});
  }
  for (const VectorXi& k : rep.d1) {
    double lo = kInf;
    for_each_integer_mode(n, p.K2, [&](const VectorXi& l) {
      if (is_multiple_of(k, l)) return;
      lo = std::min(lo, std::abs(idot(w, l)));
    });
    double thr = 2.0 * p.alpha * p.K2 / k.cast<double>().norm();
    push({"nonres_D1_" + fmt_vec(k), lo, thr, lo >= thr});
  }
  return all;
}

double dist_double_resonance(const VectorXd& w, const VectorXi& k, const VectorXi& l) {
  const int n = static_cast<int>(w.size());
  if (k.size() != n || l.size() != n)
    throw std::invalid_argument("dist_double_resonance: dimension mismatch");
  long long kk = 0, ll = 0, kl = 0;
  for (int i = 0; i < n; ++i) {
    kk += static_cast<long long>(k[i]) * k[i];
    ll += static_cast<long long>(l[i]) * l[i];
    kl += static_cast<long long>(k[i]) * l[i];
  }
  if (kk == 0 || kl * kl == kk * ll)
    throw std::invalid_argument("dist_double_resonance: k, l must be independent");

  // orthogonal pieces: v = a k + b h with h = l - (l.k) k / |k|^2 (h  |_ k)
  VectorXd kd = k.cast<double>();
  VectorXd h = l.cast<double>() - (static_cast<double>(kl) / kk) * kd;
  double a = idot(w, k) / kk;
  double b = w.dot(h) / h.squaredNorm();
  return std::sqrt(a * a * kk + b * b * h.squaredNorm());
}

D2Measure measure_estimate_D2(const Series& h, const Domain& D, const CoveringParams& p,
                              int nSamples, std::uint64_t seed) {
  if (nSamples < 1000)
    throw std::invalid_argument("measure_estimate_D2: need at least 1000 samples");
  if (D.balls.empty())
    throw std::invalid_argument("measure_estimate_D2: empty domain");

  const int n = h.dim();
  FrequencyMap om = omega_of(h);
  const auto gens1 = generators_up_to(n, p.K1);
  const auto gens2 = generators_up_to(n, p.K2);

  // precompute per-k data and the per-pair area bounds
  struct KData {
    VectorXd kd;
    double kn2, thr;
    std::vector<int> ls;  // indices of admissible companions
  };
  std::vector<KData> kd(gens1.size());
  double perPairBound = 3.0 * std::pow(2.0, n) * std::pow(p.M, n - 2) * p.alpha * p.alpha * p.K2;
  double boundSum = 0;
  for (size_t i = 0; i < gens1.size(); ++i) {
    kd[i].kd = gens1[i].cast<double>();
    kd[i].kn2 = kd[i].kd.squaredNorm();
    kd[i].thr = 3.0 * p.alpha * p.K2 / std::sqrt(kd[i].kn2);
    for (size_t j = 0; j < gens2.size(); ++j)
      if (!is_multiple_of(gens1[i], gens2[j])) kd[i].ls.push_back(static_cast<int>(j));
    boundSum += kd[i].ls.size() * perPairBound / std::sqrt(kd[i].kn2);
  }
  boundSum *= std::pow(p.Lbar, n);

  double vn = unit_ball_volume(n);
  std::vector<double> cum(D.balls.size());
  double volume = 0;
  for (size_t i = 0; i < D.balls.size(); ++i) {
    volume += vn * std::pow(D.balls[i].R, n);
    cum[i] = volume;
  }

  // fixed shard layout: the estimate does not depend on how shards are
  // assigned to workers, only on the master seed
  const int nShards = 64;
  SplitMix64 master(seed);
  std::vector<std::uint64_t> shardSeed(nShards);
  for (auto& s : shardSeed) s = master.next_u64();

  long hits = 0;
  for (int sh = 0; sh < nShards; ++sh) {
    long count = nSamples / nShards + (sh < nSamples % nShards ? 1 : 0);
    SplitMix64 rng(shardSeed[sh]);
    for (long t = 0; t < count; ++t) {
      double u = rng.uniform(0.0, volume);
      size_t bi = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
      if (bi >= D.balls.size()) bi = D.balls.size() - 1;
      VectorXd y = rng.ball(D.balls[bi].c, D.balls[bi].R);
      VectorXd w = om(y);
      bool inD2 = false;
      for (size_t i = 0; i < kd.size() && !inD2; ++i) {
        if (!(std::abs(w.dot(kd[i].kd)) < p.alpha)) continue;
        VectorXd perp = w - (w.dot(kd[i].kd) / kd[i].kn2) * kd[i].kd;
        if (!(perp.norm() < p.M)) continue;
        for (int j : kd[i].ls) {
          if (std::abs(idot(perp, gens2[j])) <= kd[i].thr) {
            inD2 = true;
            break;
          }
        }
      }
      if (inD2) ++hits;
    }
  }

  D2Measure m;
  m.samples = nSamples;
  m.fraction = static_cast<double>(hits) / nSamples;
  m.volume = volume;
  m.estimate = m.fraction * volume;
  m.boundSum = boundSum;
  return m;
}

bool complex_widening_check(const ZoneReport& rep, const Series& h,
                            const CoveringParams& p, double r, int samples,
                            std::uint64_t seed) {
  if (r < 0) throw std::invalid_argument("complex_widening_check: r must be >= 0");
  const int n = h.dim();
  if (rep.y.size() != n)
    throw std::invalid_argument("complex_widening_check: report lacks a base point");
  if (!rep.inD0 && rep.d1.empty()) return false;  // nothing certifiable

  // degraded thresholds; not certifiable once they close up
  double thr0 = p.alpha / 2 - p.L * r * p.K1;
  if (rep.inD0 && thr0 <= 0) return false;
  std::vector<double> thr1(rep.d1.size());
  for (size_t i = 0; i < rep.d1.size(); ++i) {
    thr1[i] = 2.0 * p.alpha * p.K2 / rep.d1[i].cast<double>().norm() - p.L * r * p.K2;
    if (thr1[i] <= 0) return false;
  }

  FrequencyMap om = omega_of(h);
  const auto gens1 = generators_up_to(n, p.K1);
  const auto gens2 = generators_up_to(n, p.K2);

  SplitMix64 rng(seed);
  VectorXcd yc = rep.y.cast<cplx>();
  for (int t = 0; t < samples; ++t) {
    VectorXcd delta = VectorXcd::Zero(n);
    if (r > 0) {
      // uniform in the complex ball |delta| <= r
      std::vector<double> c(2 * n);
      double s2;
      do {
        s2 = 0;
        for (auto& x : c) {
          x = rng.uniform(-1.0, 1.0);
          s2 += x * x;
        }
      } while (s2 > 1.0);
      for (int j = 0; j < n; ++j) delta[j] = cplx(c[2 * j], c[2 * j + 1]) * r;
    }
    VectorXcd wc = om.eval(yc + delta);

    if (rep.inD0) {
      for (const VectorXi& k : gens1)
        if (!(cdot_abs(wc, k) > thr0)) return false;
    }
    for (size_t i = 0; i < rep.d1.size(); ++i) {
      for (const VectorXi& l : gens2) {
        if (is_multiple_of(rep.d1[i], l)) continue;
        if (!(cdot_abs(wc, l) > thr1[i])) return false;
      }
    }
  }
  return true;
}

double estimate_lipschitz(const Series& h, const Domain& D, int samples,
                          std::uint64_t seed) {
  if (D.balls.empty()) throw std::invalid_argument("estimate_lipschitz: empty domain");
  FrequencyMap om = omega_of(h);
  const int n = om.n;
  std::vector<std::vector<YPoly>> hess(n, std::vector<YPoly>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hess[i][j] = om.grad[i].dy(j);

  SplitMix64 rng(seed);
  double best = 0;
  for (int t = 0; t < samples; ++t) {
    const Ball& B = D.balls[t % D.balls.size()];
    VectorXd y = rng.ball(B.c, B.R + D.r);
    MatrixXd H(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H(i, j) = hess[i][j].eval(y).real();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (H + H.transpose()),
                                               Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

nlohmann::json zone_report_json(const ZoneReport& rep) {
  using nlohmann::json;
  auto vecd = [](const VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  auto veci = [](const VectorXi& v) {
    return std::vector<int>(v.data(), v.data() + v.size());
  };
  json j;
  j["y"] = vecd(rep.y);
  j["omega"] = vecd(rep.omega);
  j["inD0"] = rep.inD0;
  j["d1"] = json::array();
  for (const VectorXi& k : rep.d1) j["d1"].push_back(veci(k));
  j["d2Count"] = rep.d2Count;
  j["d2"] = json::array();
  for (const auto& [k, l] : rep.d2) j["d2"].push_back({veci(k), veci(l)});
  j["certificates"] = json::array();
  for (const Certificate& c : rep.certs) {
    j["certificates"].push_back({{"kind", c.kind},
                                 {"mode", veci(c.mode)},
                                 {"divisor", c.divisor},
                                 {"threshold", c.threshold},
                                 {"satisfied", c.satisfied}});
  }
  return j;
}

void raster_csv(std::ostream& os, const Series& h, const CoveringParams& p,
                const VectorXd& lo, const VectorXd& hi, int nx, int ny) {
  if (h.dim() != 2 || lo.size() != 2 || hi.size() != 2)
    throw std::invalid_argument("raster_csv: only 2-d rasters are supported");
  if (nx < 2 || ny < 2) throw std::invalid_argument("raster_csv: need nx, ny >= 2");

  FrequencyMap om = omega_of(h);
  os << "y1,y2,zone,detail\n";
  os << std::setprecision(12);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      VectorXd y(2);
      y[0] = lo[0] + (hi[0] - lo[0]) * ix / (nx - 1);
      y[1] = lo[1] + (hi[1] - lo[1]) * iy / (ny - 1);
      std::string zone, detail;
      try {
        ZoneReport rep = classify_frequency(om(y), p);
        if (rep.d2Count > 0) {
          zone = "D2";
          detail = std::to_string(rep.d2Count) + " pairs";
        } else if (!rep.d1.empty()) {
          zone = "D1";
          std::ostringstream d;
          for (size_t i = 0; i < rep.d1.size(); ++i) {
            if (i) d << ";";
            for (int c = 0; c < rep.d1[i].size(); ++c)
              d << (c ? " " : "") << rep.d1[i][c];
          }
          detail = d.str();
        } else {
          zone = "D0";
        }
      } catch (const CoveringGap&) {
        zone = "gap";
      }
      os << y[0] << "," << y[1] << "," << zone << "," << detail << "\n";
    }
  }
}

}  // namespace resavg
