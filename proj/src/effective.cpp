#include "resavg/effective.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "resavg/lattice.hpp"
#include "resavg/norms.hpp"

namespace resavg {

namespace {

double wrap_angle(double x) {
  double w = std::fmod(x, 2 * M_PI);
  if (w < 0) w += 2 * M_PI;
  if (w >= 2 * M_PI) w -= 2 * M_PI;
  return w;
}

double real_checked(cplx v, const char* what) {
  if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v.real())))
    throw std::invalid_argument(std::string(what) + ": complex value from real data");
  return v.real();
}

}  // namespace

Series extract_Gk(const Series& g, const VectorXi& k) {
  if (int(k.size()) != g.dim())
    throw std::invalid_argument("extract_Gk: mode dimension mismatch");
  if (!is_generator(k))
    throw std::invalid_argument("extract_Gk: k must be a generator");
  for (ModeKey m : g.sorted_modes())
    if (!is_multiple_of(k, unpack_mode(m, g.dim())))
      throw std::invalid_argument("extract_Gk: mode outside the resonance line");
  return one_d_projection(g, k);
}

std::pair<double, double> phase_and_modulus(cplx fk) {
  const double mod = std::abs(fk);
  if (mod == 0.0)
    throw ZeroCoefficient("phase_and_modulus: vanishing resonant coefficient");
  return {mod, wrap_angle(std::arg(fk))};
}

EffectiveResult complete_normal_form(const Series& h, const Series& f, double eps,
                                     const VectorXi& k, const EffectiveParams& p) {
  const int n = h.dim();
  if (f.dim() != n || int(k.size()) != n)
    throw std::invalid_argument("complete_normal_form: dimension mismatch");
  if (!is_generator(k))
    throw std::invalid_argument("complete_normal_form: k must be a generator");
  if (!(p.gamma > 0 && p.gamma < 1))
    throw std::invalid_argument("complete_normal_form: gamma must lie in (0,1)");
  if (!(p.delta > 0 && p.delta < 1))
    throw std::invalid_argument("complete_normal_form: delta must lie in (0,1)");
  if (!(eps > 0) || !(p.s > 0) || !(p.rAnalyt > 0))
    throw std::invalid_argument("complete_normal_form: eps, rAnalyt, s must be positive");
  if (p.centers.empty())
    throw std::invalid_argument("complete_normal_form: no centers given");

  std::vector<Ball> balls;
  for (const VectorXd& c : p.centers) {
    if (int(c.size()) != n)
      throw std::invalid_argument("complete_normal_form: center dimension mismatch");
    balls.push_back({c, 0.0});
  }

  EffectiveResult out;

  // unit normalization: the closeness hypotheses are stated for |f|_s = 1,
  // and eps absorbs the scale (every decomposition output is invariant)
  out.normF = fourier_norm_inf(f, Domain{balls, p.rAnalyt, p.s}).value;
  if (!(out.normF > 0))
    throw std::invalid_argument("complete_normal_form: zero perturbation");
  const Series fHat = series_scale(f, 1.0 / out.normF);
  const double epsHat = eps * out.normF;

  const Coeff* ck = fHat.find(pack_mode(k));
  cplx fkVal = 0;
  if (ck) fkVal = ck->eval(p.centers[0].cast<cplx>(), fHat.context().get());
  const auto [modulus, phase] = phase_and_modulus(fkVal);

  CoveringParams cov = p.cov;
  cov.epsilon = epsHat;
  cov.alpha = std::sqrt(epsHat) * std::pow(double(cov.K2), cov.nu);

  // hypothesis ledger of the decomposition theorem (the engine adds its own)
  auto& hyp = out.hypothesisChecks;
  ClassParams cp;
  cp.s = p.s;
  cp.n = n;
  cp.delta = p.delta;
  cp.tail = TailFunction::make_tau0(p.gamma, p.s, n);
  cp.modeCutoff = cov.K1;
  const ClassMembership mem = in_class(fHat, cp);
  hyp.push_back({"unit-norm perturbation lies in the generic class",
                 mem.inClass ? 0.0 : 1.0, 0.0, mem.inClass});

  const double l1k = double(k.lpNorm<1>());
  const double classFloor =
      p.delta * std::pow(l1k, -double(n)) * std::exp(-l1k * p.s);
  hyp.push_back(make_check("class floor at the resonant mode <= |f_k|", classFloor,
                           modulus, 1e-12));
  hyp.push_back(make_check("tail threshold tau0 <= |k|_1", mem.tau, l1k));
  hyp.push_back(make_check("|k|_1 <= K1", l1k, double(cov.K1)));

  const double ceiling = 512.0 / std::pow(p.s, n) * std::exp(-0.5 * n * n);
  hyp.push_back({"gamma delta < 2^9 s^-n e^(-n^2/2)", p.gamma * p.delta, ceiling,
                 p.gamma * p.delta < ceiling});
  hyp.push_back(make_check("3 n / 2 + 2 <= nu", 1.5 * n + 2.0, cov.nu));
  // cutoff sizing, in log space so extreme parameters cannot overflow
  const double lnNeed = (p.s + 5.0) + (n + 11.0) * std::log(2.0) +
                        2.0 * n * std::log(double(n)) + std::log(cov.L) -
                        (2.0 * n + 1.0) * std::log(p.s) -
                        std::log(p.gamma * p.delta);
  const double lnHave = (2.0 * cov.nu - 3.0 * n - 3.0) * std::log(double(cov.K2));
  hyp.push_back(make_check(
      "ln(e^(s+5) 2^(n+11) n^(2n) L / (s^(2n+1) gamma delta)) <= (2 nu - 3 n - 3) ln K2",
      lnNeed, lnHave, 1e-12));
  hyp.push_back(make_check("ln eps_hat <= 2 ln(L r) - 2 nu ln K2", std::log(epsHat),
                           2.0 * std::log(cov.L * p.rAnalyt) -
                               2.0 * cov.nu * std::log(double(cov.K2)),
                           1e-12));

  for (const CheckResult& c : hyp) out.hypothesesMet = out.hypothesesMet && c.pass;
  if (p.strict && !out.hypothesesMet)
    for (const CheckResult& c : hyp)
      if (!c.pass)
        throw SmallnessViolated("complete_normal_form: hypothesis failed: " + c.name,
                                c.lhs);

  out.zone = averaging_at_simple_resonance(h, fHat, epsHat, k, cov, p.centers,
                                           p.rAnalyt, p.s, p.tailTol);
  if (p.strict && !out.zone.hypothesesMet)
    for (const CheckResult& c : out.zone.hypothesisChecks)
      if (!c.pass)
        throw SmallnessViolated(
            "complete_normal_form: averaging hypothesis failed: " + c.name, c.lhs);
  out.hypothesesMet = out.hypothesesMet && out.zone.hypothesesMet;

  // one-angle decomposition: g(y, x) = G(y, k.x); peel off the leading
  // harmonic and divide by twice its modulus
  Series Gk = extract_Gk(out.zone.g, k);
  Series T1(1, fHat.reality());
  {
    VectorXi mj(1);
    mj << 1;
    T1.set_coeff(mj, fkVal);
    mj << -1;
    T1.set_coeff(mj, std::conj(fkVal));
  }
  const Series dev = series_add(Gk, T1, cplx(-1.0, 0.0));
  const double twoMod = 2.0 * modulus;

  const Domain devDom{balls, out.zone.rCore / 2, 2.0};
  const double gammaBound = fourier_norm_l1(dev, devDom).value / twoMod;
  const Domain remDom{balls, out.zone.rCore / 2, out.zone.sIn / 2};
  const double remBound =
      fourier_norm_l1(out.zone.fStarStar, remDom).value / twoMod;
  const double remRhs = std::pow(2.0, 10.0 * n) * std::pow(double(n), 3.0 * n) /
                        (std::pow(p.s, 3.0 * n) * p.delta) *
                        std::exp(-cov.K2 * p.s / 8.0);

  out.checks.push_back(
      make_check("one-angle deviation (half core radius, width 2) <= gamma",
                 gammaBound, p.gamma, 1e-12));
  out.checks.push_back(
      make_check("remainder (half core radius, half shrunk strip) <= tail bound",
                 remBound, remRhs, 1e-12));

  double latticeMass = 0;
  AlgebraContext* rctx = out.zone.fStarStar.context().get();
  for (ModeKey m : out.zone.fStarStar.sorted_modes())
    if (is_multiple_of(k, unpack_mode(m, n)))
      latticeMass += out.zone.fStarStar.find(m)->bound_dom(remDom, rctx);
  out.checks.push_back({"remainder carries no resonance-line modes", latticeMass,
                        0.0, latticeMass == 0.0});

  const Coeff* ckOrig = f.find(pack_mode(k));
  const cplx fkOrig =
      ckOrig ? ckOrig->eval(p.centers[0].cast<cplx>(), f.context().get()) : cplx(0);
  const double amplitude = twoMod * epsHat;
  out.checks.push_back(make_check("amplitude invariant under unit normalization",
                                  std::abs(amplitude - 2.0 * std::abs(fkOrig) * eps),
                                  1e-9 * amplitude));

  out.pot.k = k;
  out.pot.modulus = modulus;
  out.pot.phase = phase;
  out.pot.epsEff = epsHat;
  out.pot.amplitude = amplitude;
  out.pot.GkTilde = series_scale(dev, 1.0 / twoMod);
  out.pot.remainder = series_scale(out.zone.fStarStar, 1.0 / twoMod);
  out.pot.Gk = std::move(Gk);
  out.pot.gammaBound = gammaBound;
  out.pot.remainderBound = remBound;
  return out;
}

Series one_angle_at(const Series& G, const VectorXd& y) {
  if (G.dim() != 1)
    throw std::invalid_argument("one_angle_at: one-angle series required");
  Series out(1, G.reality());
  AlgebraContext* ctx = G.context().get();
  const VectorXcd yc = y.cast<cplx>();
  for (ModeKey m : G.sorted_modes()) {
    const cplx v = G.find(m)->eval(yc, ctx);
    if (v != 0.0) out.set_coeff(unpack_mode(m, 1), v);
  }
  out.discarded = G.discarded;
  return out;
}

MorseReport morse_check(double phase, const Series& G, double gamma) {
  if (!(gamma > 0 && gamma < 1))
    throw std::invalid_argument("morse_check: gamma must lie in (0,1)");
  if (G.dim() != 1)
    throw std::invalid_argument("morse_check: one-angle series required");

  // constant coefficients only (evaluate y-dependent input with one_angle_at)
  std::map<int, cplx> cj;
  for (ModeKey m : G.sorted_modes()) {
    const Coeff* c = G.find(m);
    if (!c->is_poly())
      throw std::invalid_argument("morse_check: constant coefficients required");
    const YPoly pl = c->as_poly();
    if (!pl.is_constant())
      throw std::invalid_argument("morse_check: constant coefficients required");
    cj[unpack_mode(m, 1)[0]] = pl.constant_value();
  }

  double sumAbs = 0;
  for (const auto& [j, v] : cj) sumAbs += std::abs(v);
  const double tolR = 1e-12 * (1.0 + sumAbs);
  for (const auto& [j, v] : cj) {
    if (j == 0) {
      if (std::abs(v.imag()) > tolR)
        throw std::invalid_argument("morse_check: real-valued series required");
      continue;
    }
    auto it = cj.find(-j);
    const cplx mirror = it == cj.end() ? cplx(0) : it->second;
    if (std::abs(mirror - std::conj(v)) > tolR)
      throw std::invalid_argument("morse_check: real-valued series required");
  }

  MorseReport rep;
  const double e2 = std::exp(2.0);
  // the dropped-tail ledger is accounted at width 2, so a mass d can hide at
  // any mode j with |c_j| <= d e^{-2|j|}; its derivatives are <= d e^{-2}
  const double evalSlack = std::exp(-2.0) * G.discarded;

  double norm2 = G.discarded, supD1 = evalSlack, supD2 = evalSlack;
  for (const auto& [j, v] : cj) {
    const double a = std::abs(v);
    norm2 += a * std::exp(2.0 * std::abs(j));
    supD1 += std::abs(j) * a;
    supD2 += double(j) * j * a;
  }

  auto require = [&](CheckResult c) {
    rep.checks.push_back(c);
    if (!rep.checks.back().pass)
      throw CertificationFailed("cosine-likeness certificate failed: " +
                                rep.checks.back().name);
  };

  require(make_check("deviation width-2 norm <= gamma", norm2, gamma, 1e-12));
  require(make_check("sup |G'| <= gamma e^-2", supD1, gamma / e2, 1e-12));
  require(make_check("sup |G''| <= gamma e^-2", supD2, gamma / e2, 1e-12));

  const double thetaStar = std::asin(gamma / e2);
  const double cTheorem = std::sqrt(1.0 - gamma / e2) - gamma / e2;
  rep.thetaStarWindow = thetaStar;
  rep.monotoneC = cTheorem;

  const int gridN = 2048;
  const double hGrid = 2 * M_PI / gridN;
  const double pad = 3 * hGrid;

  // slope floors: inside the (padded) windows cos(theta + phase) keeps a
  // sign with margin cos(thetaStar + pad), so psi' = -cos + G'' is one-signed
  const double cPad = std::cos(thetaStar + pad) - supD2;
  require(make_check("theorem slope constant <= certified window slope", cTheorem,
                     std::cos(thetaStar) - supD2, 1e-12));
  require({"padded window slope floor positive", 0.0, cPad, cPad > 0.0});
  rep.monotoneVerified = true;

  auto psi = [&](double th) {
    cplx gp = 0;
    for (const auto& [j, v] : cj) gp += cplx(0.0, double(j)) * v * std::exp(cplx(0.0, j * th));
    return -std::sin(th + phase) + gp.real();
  };

  const double thMax = -phase;          // near the maximum of u
  const double thMin = -phase + M_PI;   // near the minimum
  const double a1 = thMax - thetaStar - pad, b1 = thMax + thetaStar + pad;
  const double a2 = thMin - thetaStar - pad, b2 = thMin + thetaStar + pad;

  const double psiA1 = psi(a1), psiB1 = psi(b1), psiA2 = psi(a2), psiB2 = psi(b2);
  require({"derivative positive entering the max window", 2 * evalSlack, psiA1,
           psiA1 > 2 * evalSlack});
  require({"derivative negative leaving the max window", psiB1, -2 * evalSlack,
           psiB1 < -2 * evalSlack});
  require({"derivative negative entering the min window", psiA2, -2 * evalSlack,
           psiA2 < -2 * evalSlack});
  require({"derivative positive leaving the min window", 2 * evalSlack, psiB2,
           psiB2 > 2 * evalSlack});

  // between the windows psi keeps its sign: sample at <= hGrid spacing and
  // keep a Lipschitz margin (|psi'| <= 1 + sup|G''|) plus evaluation slack
  const double arcLen = (thMin - thetaStar - pad) - (thMax + thetaStar + pad);
  const int steps = std::max(2, int(std::ceil(arcLen / hGrid)));
  const double step = arcLen / steps;
  const double margin = (1.0 + supD2) * step / 2 + 2 * evalSlack;

  const double inf = std::numeric_limits<double>::infinity();
  double worstDown = -inf, worstUp = inf;
  for (int i = 0; i <= steps; ++i) {
    worstDown = std::max(worstDown, psi(b1 + i * step));
    worstUp = std::min(worstUp, psi(b2 + i * step));
  }
  require({"descending arc derivative <= -margin", worstDown, -margin,
           worstDown <= -margin});
  require({"ascending arc derivative >= margin", margin, worstUp,
           worstUp >= margin});

  auto bisect = [&](double lo, double hi, bool downward) {
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double v = psi(mid);
      if (downward ? v >= 0 : v <= 0)
        lo = mid;
      else
        hi = mid;
    }
    return wrap_angle(0.5 * (lo + hi));
  };
  rep.maxima.push_back(bisect(a1, b1, true));
  rep.minima.push_back(bisect(a2, b2, false));
  rep.criticalCount = 2;
  return rep;
}

VectorXd find_resonant_point(const Series& h, const VectorXi& k, const VectorXd& a,
                             const VectorXd& b, double tol) {
  const int n = h.dim();
  if (int(k.size()) != n || int(a.size()) != n || int(b.size()) != n)
    throw std::invalid_argument("find_resonant_point: dimension mismatch");
  const std::vector<YPoly> grad = integrable_gradient(h);
  auto phi = [&](double t) {
    const VectorXd y = a + t * (b - a);
    cplx sum = 0;
    for (int i = 0; i < n; ++i) sum += double(k[i]) * grad[i].eval(y);
    return real_checked(sum, "find_resonant_point");
  };
  const double fa = phi(0.0), fb = phi(1.0);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0))
    throw std::invalid_argument("find_resonant_point: segment does not bracket a resonance");
  double lo = 0, hi = 1;
  const double seg = (b - a).norm();
  for (int it = 0; it < 400 && (hi - lo) * seg > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = phi(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fm > 0) == (fa > 0))
      lo = mid;
    else
      hi = mid;
  }
  return a + 0.5 * (lo + hi) * (b - a);
}

PendulumModel pendulum_reduce(const Series& h, const VectorXi& k, const VectorXd& y0,
                              double amplitude, double phase) {
  const int n = h.dim();
  if (int(k.size()) != n || int(y0.size()) != n)
    throw std::invalid_argument("pendulum_reduce: dimension mismatch");
  if (vec_gcd(k) != 1)
    throw std::invalid_argument("pendulum_reduce: k must have coprime components");
  if (!(amplitude >= 0))
    throw std::invalid_argument("pendulum_reduce: amplitude must be nonnegative");

  const std::vector<YPoly> grad = integrable_gradient(h);
  cplx res = 0;
  for (int i = 0; i < n; ++i) res += double(k[i]) * grad[i].eval(y0);
  if (std::abs(res) > 1e-10)
    throw std::invalid_argument("pendulum_reduce: y0 is not resonant for k");

  double mk = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mk += double(k[i]) * double(k[j]) *
            real_checked(grad[i].dy(j).eval(y0), "pendulum_reduce");

  const UnimodularFrame fr = resonance_frame(k);
  // secular action: last component of Y = A^{-T} y (so that X = A x has
  // X_n = k.x and Y.X = y.x)
  const VectorXd Y = fr.Ainv.cast<double>().transpose() * y0;

  PendulumModel m;
  m.k = k;
  m.y0 = y0;
  m.mk = mk;
  m.amplitude = amplitude;
  m.phase = phase;
  m.Y0n = Y[n - 1];
  m.pendulumEquivalent = std::abs(mk) > 1e-12;
  return m;
}

std::string level_set_portrait(const PendulumModel& m, const PortraitGrid& g) {
  if (g.nY < 2 || g.nX < 2)
    throw std::invalid_argument("level_set_portrait: grid needs at least 2x2 points");
  const bool separatrix = m.pendulumEquivalent && m.amplitude > 0;
  const double halfWidth =
      separatrix ? 2.0 * std::sqrt(m.amplitude / std::abs(m.mk)) : 0.0;
  const double W = g.halfWidthY > 0 ? g.halfWidthY : (separatrix ? 3.0 * halfWidth : 1.0);
  const double eSep = m.mk >= 0 ? m.amplitude : -m.amplitude;
  const double xHyp = wrap_angle(m.mk >= 0 ? -m.phase : M_PI - m.phase);

  std::ostringstream os;
  os << std::setprecision(17);
  os << "# separatrix_energy=" << eSep << "\n";
  os << "# separatrix_half_width=" << halfWidth << "\n";
  os << "# hyperbolic_angle=" << xHyp << "\n";
  os << "Y,X,energy\n";
  for (int iy = 0; iy < g.nY; ++iy) {
    const double Y = m.Y0n - W + 2.0 * W * iy / (g.nY - 1);
    for (int ix = 0; ix < g.nX; ++ix) {
      const double X = 2.0 * M_PI * ix / (g.nX - 1);
      const double E =
          0.5 * m.mk * (Y - m.Y0n) * (Y - m.Y0n) + m.amplitude * std::cos(X + m.phase);
      os << Y << ',' << X << ',' << E << "\n";
    }
  }
  return os.str();
}

bool calc_lemma_check(double a, double eps, double t) {
  const bool hyp = a > 2 * std::log(2.0) && eps > 0 && eps < std::exp(-a * a / 2) &&
                   t > 4 * std::log(1.0 / eps);
  if (!hyp) return true;  // nothing is claimed outside the hypotheses
  return -t + a * std::log(t) < std::log(eps);
}

}  // namespace resavg
