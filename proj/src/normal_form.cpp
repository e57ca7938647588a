#include "resavg/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "resavg/lattice.hpp"
#include "resavg/norms.hpp"
#include "resavg/rng.hpp"

namespace resavg {

namespace {

constexpr double kSlack = 1e-12;  // float-rounding slack in pass rules

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_mode(const VectorXi& k) {
  std::string s = "(";
  for (int i = 0; i < k.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(k[i]);
  }
  return s + ")";
}

// deterministic complex points on the boundary spheres |y - c| = R + r,
// round-robin over the balls (divisor minima of low-degree polynomials and
// norm-style sups both live on the boundary)
std::vector<VectorXcd> sample_points_y(const Domain& d, int count, std::uint64_t salt) {
  const int n = d.dim();
  KroneckerSeq seq(2 * n, salt);
  std::vector<VectorXcd> pts;
  pts.reserve(count);
  VectorXcd y(n);
  for (int i = 0; i < count; ++i) {
    const Ball& b = d.balls[std::size_t(i) % d.balls.size()];
    double nrm2 = 0;
    for (int j = 0; j < n; ++j) {
      double u1 = std::max(seq.coord(i, 2 * j), 1e-18);
      double u2 = seq.coord(i, 2 * j + 1);
      double rad = std::sqrt(-2.0 * std::log(u1));
      y[j] = cplx(rad * std::cos(2 * M_PI * u2), rad * std::sin(2 * M_PI * u2));
      nrm2 += std::norm(y[j]);
    }
    double scale = (b.R + d.r) / std::sqrt(std::max(nrm2, 1e-300));
    for (int j = 0; j < n; ++j) y[j] = b.c[j] + scale * y[j];
    pts.push_back(y);
  }
  return pts;
}

ModeKey zero_mode(int n) { return pack_mode(VectorXi::Zero(n)); }

// Mass of the computed coefficients alone, with the carried error ledger
// taken back out. Contraction control has to read this: the ledger is a
// one-way ratchet (error absorbed once never shrinks), while the computed
// remainder keeps contracting geometrically, so an inclusive norm would
// eventually mask a perfectly healthy iteration behind its error floor.
// Exported run-level bounds keep using the inclusive norms.
double resolved_l1(const Series& g, const Domain& d) {
  return std::max(0.0, fourier_norm_l1(g, d).value - g.discarded);
}

// Support control for the bracket chains: every Poisson bracket multiplies
// mode supports and rational-term lists, so without trimming the iteration
// cost explodes while the trimmed mass is far below the Lie tails. Drop
// rational terms greedily from the smallest certified mass up, spending at
// most `budget` of l1 mass measured on `d`; the drop is folded into
// Series::discarded, which every Fourier norm adds back, so downstream
// bounds stay upper bounds (on `d` and on any shrinking of it).
double prune_support(Series& f, const Domain& d, double budget) {
  if (!(budget > 0) || f.empty()) return 0;
  AlgebraContext* ctx = f.context().get();
  const int n = f.dim();
  struct Cand {
    double mass;
    ModeKey m;
    std::size_t term;
  };
  std::vector<Cand> cands;
  for (ModeKey m : f.sorted_modes()) {
    const Coeff* co = f.find(m);
    const double w = std::exp(mode_l1(m, n) * d.s);
    for (std::size_t i = 0; i < co->t.size(); ++i) {
      const RTerm& r = co->t[i];
      double v = std::abs(r.c);
      if (!r.num.is_zero()) v *= r.num.bound_dom(d);
      if (r.den != 0) v /= ctx->den_lower(r.den, d);
      cands.push_back({v * w, m, i});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.mass != b.mass) return a.mass < b.mass;
    if (a.m != b.m) return a.m < b.m;
    return a.term < b.term;
  });
  double dropped = 0;
  std::unordered_map<ModeKey, std::vector<std::size_t>, ModeKeyHash> kill;
  for (const Cand& c : cands) {
    if (dropped + c.mass > budget) break;
    dropped += c.mass;
    kill[c.m].push_back(c.term);
  }
  if (kill.empty()) return 0;
  for (auto& [m, idxs] : kill) {
    std::sort(idxs.begin(), idxs.end());
    Coeff& co = f.at(m);
    Coeff repl;
    std::size_t kpos = 0;
    for (std::size_t i = 0; i < co.t.size(); ++i) {
      if (kpos < idxs.size() && idxs[kpos] == i) {
        ++kpos;
        continue;
      }
      const RTerm& r = co.t[i];
      repl.add(r.c, r.den, r.num.is_zero() ? nullptr : &r.num);
    }
    co = std::move(repl);
  }
  f.prune();
  f.discarded += dropped;
  return dropped;
}

}  // namespace

void StepParams::validate(int n) const {
  if (K < 2) throw std::invalid_argument("StepParams: K >= 2 required");
  if (!(alphaEff > 0))
    throw std::invalid_argument("StepParams: alphaEff must be positive");
  if (domain.balls.empty() || domain.dim() != n)
    throw std::invalid_argument("StepParams: domain dimension mismatch");
  if (!(rho > 0) || !(rho < domain.r) || !(sigma > 0) || !(sigma < domain.s))
    throw std::invalid_argument(
        "StepParams: shrink widths must satisfy 0 < rho < r and 0 < sigma < s");
  if (lattice.kind == LatticeSpec::Line &&
      (lattice.k.size() != n || !is_generator(lattice.k)))
    throw std::invalid_argument(
        "StepParams: lattice line must be a generator of matching dimension");
}

std::vector<YPoly> integrable_gradient(const Series& h) {
  const int n = h.dim();
  const ModeKey zero = zero_mode(n);
  YPoly p;
  for (const auto& [m, co] : h) {
    if (co.is_zero()) continue;
    if (m != zero)
      throw std::invalid_argument("integrable part must be angle-independent");
    if (!co.is_poly())
      throw std::invalid_argument("integrable part must have polynomial actions");
    p = co.as_poly();
  }
  std::vector<YPoly> g;
  g.reserve(n);
  for (int j = 0; j < n; ++j) g.push_back(p.dy(j));
  return g;
}

FlatSplit split_flat(const Series& f, const LatticeSpec& lam, int K) {
  if (K < 1) throw std::invalid_argument("split_flat: K >= 1 required");
  Series perp = project_lattice_complement(f, lam);
  FlatSplit out;
  out.fK = truncate(perp, K);
  out.fFlat = series_add(project_lattice(f, lam), truncate_complement(perp, K));
  return out;
}

Series solve_homological(const Series& h, const Series& fK, const StepParams& p) {
  const int n = fK.dim();
  p.validate(n);
  if (h.dim() != n)
    throw std::invalid_argument("solve_homological: dimension mismatch");
  std::vector<YPoly> grad = integrable_gradient(h);

  ContextPtr ctx = fK.context();
  if (!ctx) ctx = std::make_shared<AlgebraContext>(n);
  Series phi(n, fK.reality());
  phi.set_context(ctx);

  const auto ypts = sample_points_y(p.domain, 20, 0x501eed5aULL);
  const cplx minusI(0, -1);
  for (ModeKey m : fK.sorted_modes()) {
    VectorXi mv = unpack_mode(m, n);
    if (mv.isZero() || p.lattice.contains(m, n))
      throw std::invalid_argument("solve_homological: mode " + fmt_mode(mv) +
                                  " lies inside the lattice");
    if (mode_l1(m, n) > p.K)
      throw std::invalid_argument("solve_homological: mode " + fmt_mode(mv) +
                                  " is above the cutoff");
    YPoly div;
    for (int j = 0; j < n; ++j)
      if (mv[j] != 0) {
        YPoly t = grad[j];
        t *= cplx(double(mv[j]), 0);
        div += t;
      }
    for (const VectorXcd& y : ypts) {
      double v = std::abs(div.eval(y));
      if (v < p.alphaEff)
        throw DivisorTooSmall("solve_homological: divisor for mode " + fmt_mode(mv) +
                              " sampled at " + fmt_double(v) +
                              ", below the certified floor " + fmt_double(p.alphaEff));
    }
    std::uint32_t fid = ctx->intern_factor(div, p.alphaEff);
    Coeff& pc = phi.at(m);
    for (const RTerm& t : fK.find(m)->t) {
      std::uint32_t dnew = ctx->den_mul_factor(t.den, fid);
      pc.add(minusI * t.c, dnew, t.num.is_zero() ? nullptr : &t.num);
    }
  }
  phi.prune();

  if (!fK.empty()) {
    double l1fK = fourier_norm_l1(fK, p.domain).value;
    double resid = homological_residual(h, phi, fK, p.domain, 20);
    if (resid > 1e-9 * l1fK)
      throw std::runtime_error("solve_homological: sampled residual " +
                               fmt_double(resid) + " exceeds 1e-9 * |fK| = " +
                               fmt_double(1e-9 * l1fK));
  }
  return phi;
}

double homological_residual(const Series& h, const Series& phi, const Series& fK,
                            const Domain& dom, int samples) {
  if (samples < 1) throw std::invalid_argument("homological_residual: samples < 1");
  Series R = series_add(poisson_bracket(h, phi), fK);
  const int n = R.dim();
  const auto ypts = sample_points_y(dom, samples, 0xba5e11e5ULL);
  KroneckerSeq xs(2 * n, 0x7e57a119ULL);
  VectorXcd x(n);
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < n; ++j)
      x[j] = cplx(2 * M_PI * xs.coord(i, j), dom.s * (2 * xs.coord(i, n + j) - 1));
    worst = std::max(worst, std::abs(R.evaluate(ypts[std::size_t(i)], x)));
  }
  return worst;
}

namespace {

// the three series the engine sums: the full exponential (with the identity
// term), the correction part only (l >= 1), and the l/(l+1)!-weighted chain
// that the transformed Hamiltonian produces for the removed part
enum class ChainKind { lie, correction, weighted };

struct ChainOut {
  Series sum;
  int order = 0;
  double theta = 0;
  double tail = 0;
};

ChainOut lie_chain(const Series& u, const Series& phi, const StepParams& p,
                   ChainKind kind, int J, double tolAbs) {
  const int n = u.dim();
  ChainOut out;
  double l1phi = fourier_norm_l1(phi, p.domain).value;
  out.theta = 4 * M_E * l1phi / (p.rho * p.sigma);
  if (out.theta > 1)
    throw SmallnessViolated("lie transform: flow contraction " +
                                fmt_double(out.theta) + " exceeds 1",
                            out.theta);

  Series bracket1 = poisson_bracket(u, phi);
  const Domain half = p.domain.shrunk(p.rho / 2, p.sigma / 2);
  double B = fourier_norm_l1(bracket1, half).value;

  if (J < 0) {
    // smallest order whose geometric tail bound 2 (theta/2)^J B clears tolAbs
    constexpr int kCap = 20;
    J = -1;
    for (int j = 1; j <= kCap; ++j)
      if (2 * std::pow(out.theta / 2, j) * B <= tolAbs) {
        J = j;
        break;
      }
    if (J < 0)
      throw SmallnessViolated(
          "lie transform: truncation cap (order 20) cannot reach the tail "
          "tolerance " +
              fmt_double(tolAbs),
          out.theta);
  }
  out.order = J;
  out.tail = 2 * std::pow(out.theta / 2, J) * B;

  double prunedMass = prune_support(bracket1, half, tolAbs / 4);
  Series acc = (kind == ChainKind::lie) ? u : Series(n, u.reality() && phi.reality());
  acc.set_context(bracket1.context());
  Series term = bracket1;
  double fact = 1;  // l!
  for (int l = 1; l <= J; ++l) {
    fact *= l;
    if (l > 1) {
      term = poisson_bracket(term, phi);
      prunedMass += prune_support(term, half, tolAbs / std::pow(2.0, l + 1));
    }
    double w = (kind == ChainKind::weighted) ? double(l) / (fact * (l + 1))
                                             : 1.0 / fact;
    if (!term.empty()) acc = series_add(acc, term, w);
  }
  // pruned mass enters the sum directly (weight <= 1) and echoes through the
  // remaining brackets with a factor <= 2 theta, so 3x covers both
  out.tail += 3 * prunedMass;
  acc.prune();
  out.sum = std::move(acc);
  return out;
}

}  // namespace

LieResult lie_transform_ex(const Series& u, const Series& phi, const StepParams& p,
                           int J, double tailTol) {
  const int n = u.dim();
  p.validate(n);
  if (phi.dim() != n)
    throw std::invalid_argument("lie_transform: dimension mismatch");
  if (tailTol < 0) tailTol = 1e-12;
  double l1u = fourier_norm_l1(u, p.domain).value;
  ChainOut c = lie_chain(u, phi, p, ChainKind::lie, J, tailTol * l1u);
  LieResult out;
  out.order = c.order;
  out.theta = c.theta;
  out.tailBound = c.tail;
  out.value = std::move(c.sum);
  out.value.discarded = (1 + 2 * c.theta) * u.discarded + c.tail;
  return out;
}

Series lie_transform(const Series& u, const Series& phi, const StepParams& p, int J) {
  return lie_transform_ex(u, phi, p, J).value;
}

AveragingStep averaging_step(const Series& h, const Series& f, const StepParams& p,
                             double tailTol) {
  const int n = f.dim();
  p.validate(n);
  if (h.dim() != n)
    throw std::invalid_argument("averaging_step: dimension mismatch");

  AveragingStep out;
  FlatSplit split = split_flat(f, p.lattice, p.K);
  out.fFlat = split.fFlat;
  out.fK = split.fK;

  const double l1f = fourier_norm_l1(f, p.domain).value;
  const double resF = resolved_l1(f, p.domain);
  const double resFK = resolved_l1(out.fK, p.domain);
  out.theta = 4 * M_E * resFK / (p.alphaEff * p.rho * p.sigma);
  if (out.theta > 1)
    throw SmallnessViolated("averaging step: contraction " + fmt_double(out.theta) +
                                " exceeds 1",
                            out.theta);

  out.phi = solve_homological(h, out.fK, p);
  const double l1phi = fourier_norm_l1(out.phi, p.domain).value;
  out.checks.push_back(make_check("generator norm <= fK norm / alpha", l1phi,
                                  resFK / p.alphaEff, kSlack));
  out.residual = homological_residual(h, out.phi, out.fK, p.domain, 20);
  out.checks.push_back(
      make_check("homological residual <= 1e-9 fK norm", out.residual, 1e-9 * resFK));

  const double tolAbs = tailTol * l1f;
  ChainOut main = lie_chain(out.fK, out.phi, p, ChainKind::weighted, -1, tolAbs);
  ChainOut flat = lie_chain(out.fFlat, out.phi, p, ChainKind::correction, -1, tolAbs);
  out.thetaHat = main.theta;
  out.orderMain = main.order;
  out.orderFlat = flat.order;
  out.tailMain = main.tail;
  out.tailFlat = flat.tail;

  out.fStar = series_add(main.sum, flat.sum);
  // ledger: chain tails plus the Lie echo of whatever error f carried in
  out.fStar.discarded = main.tail + flat.tail + 2 * out.thetaHat * f.discarded;
  out.fPlus = series_add(out.fFlat, out.fStar);
  out.fPlus.discarded = (1 + 2 * out.thetaHat) * f.discarded + main.tail + flat.tail;

  Domain target = p.domain.shrunk(p.rho, p.sigma);
  // fPlus feeds the next step, whose domain is exactly `target`; trim its
  // support there so iterated steps stay tractable
  prune_support(out.fPlus, target, tolAbs);
  out.checks.push_back(make_check("remainder contraction: fStar <= 4 theta f",
                                  resolved_l1(out.fStar, target),
                                  4 * out.theta * resF, kSlack));
  out.dispY = out.theta * p.rho / (4 * M_E);
  out.dispX = out.theta * p.sigma / 4;
  return out;
}

NormalFormResult normal_form(const Series& h, const Series& f, const LatticeSpec& lam,
                             int K, const Domain& dom, double alphaEff,
                             double tailTol) {
  const int n = f.dim();
  if (h.dim() != n || dom.dim() != n)
    throw std::invalid_argument("normal_form: dimension mismatch");
  if (K < 2) throw std::invalid_argument("normal_form: K >= 2 required");
  const double r = dom.r, s = dom.s;

  NormalFormResult out;
  out.K = K;
  out.lattice = lam;
  out.domainIn = dom;
  const double l1f = fourier_norm_l1(f, dom).value;
  out.norms.push_back({"f (input)", fourier_norm_l1(f, dom)});

  ThetaLedger& led = out.ledger;
  led.thetaStar = 2048.0 * K * K * l1f / (alphaEff * r * s);
  if (!(led.thetaStar < 1))
    throw SmallnessViolated("normal form smallness: thetaStar = " +
                                fmt_double(led.thetaStar) + " is not < 1",
                            led.thetaStar);
  led.delta = 32.0 * M_E * K * K * K / (alphaEff * r * s);

  auto run_step = [&](const Series& fin, const StepParams& sp, int index) {
    AveragingStep st = averaging_step(h, fin, sp, tailTol);
    for (CheckResult c : st.checks) {
      c.name = "[step " + std::to_string(index) + "] " + c.name;
      out.checks.push_back(c);
    }
    StepRecord rec;
    rec.index = index;
    rec.r = sp.domain.r;
    rec.s = sp.domain.s;
    rec.theta = st.theta;
    rec.fKNorm = fourier_norm_l1(st.fK, sp.domain).value;
    rec.phiNorm = fourier_norm_l1(st.phi, sp.domain).value;
    rec.fStarNorm =
        fourier_norm_l1(st.fStar, sp.domain.shrunk(sp.rho, sp.sigma)).value;
    rec.orderMain = st.orderMain;
    rec.orderFlat = st.orderFlat;
    rec.residual = st.residual;
    rec.dispY = st.dispY;
    rec.dispX = st.dispX;
    out.steps.push_back(rec);
    out.generators.push_back(st.phi);
    out.dispY += st.dispY;
    out.dispX += st.dispX;
    return st;
  };

  // preliminary step: one coarse sweep that spends r/4 and s/2K
  StepParams pre{lam, K, alphaEff, r / 4, s / (2.0 * K), dom};
  AveragingStep st = run_step(f, pre, -1);
  led.thetaMinus1 = st.theta;
  Series fi = st.fPlus;
  Series prevFlat = st.fFlat;

  // K fine steps, each spending r/4K and s/2K^2
  const double rho = r / (4.0 * K), sigma = s / (2.0 * K * K);
  for (int i = 0; i < K; ++i) {
    Domain di{dom.balls, 0.75 * r - i * rho, s * (1 - 0.5 / K) - i * sigma};
    StepParams pi{lam, K, alphaEff, rho, sigma, di};
    AveragingStep sti = run_step(fi, pi, i);
    const double thi = sti.theta;
    led.thetaSeq.push_back(thi);
    if (i == 0) led.theta0 = thi;

    const int expo = (i == 0) ? 2 : i + 1;
    const double rhsTheta = std::pow(led.thetaStar / 8, expo);
    CheckResult thCheck = make_check(
        "theta_" + std::to_string(i) + " <= (thetaStar/8)^" + std::to_string(expo),
        thi, rhsTheta, kSlack);
    out.checks.push_back(thCheck);
    if (!thCheck.pass)
      throw SmallnessViolated("normal form: contraction chain broke at step " +
                                  std::to_string(i) + " (theta = " +
                                  fmt_double(thi) + ", bound " +
                                  fmt_double(rhsTheta) + ")",
                              thi);

    Series drift = series_add(sti.fFlat, prevFlat, -1.0);
    const double rhsDrift = (i == 0) ? 4 * led.thetaMinus1 * l1f
                                     : std::pow(led.thetaStar / 8, i + 1) / led.delta;
    out.checks.push_back(make_check("flat drift of step " + std::to_string(i),
                                    resolved_l1(drift, di), rhsDrift, kSlack));
    prevFlat = sti.fFlat;
    fi = sti.fPlus;
  }

  out.fFinal = fi;
  Domain outD{dom.balls, r / 2, s * (1.0 - 1.0 / K)};
  out.domainOut = outD;
  out.g = project_lattice(fi, lam);
  out.fStarStar = project_lattice_complement(fi, lam);
  for (ModeKey m : out.fStarStar.sorted_modes())
    if (lam.contains(m, n))
      throw std::logic_error("normal_form: lattice projector identity broken");
  FlatSplit inSplit = split_flat(f, lam, K);
  out.fFlat = inSplit.fFlat;
  out.fStar = series_add(fi, out.fFlat, -1.0);
  out.fStar.prune();  // plain parts of fi and fFlat cancel exactly

  // diagnostic K-th contraction number: the low non-lattice residue of the
  // final perturbation, scaled like the per-step thetas
  FlatSplit finSplit = split_flat(fi, lam, K);
  const double l1fKfin = resolved_l1(finSplit.fK, outD);
  led.thetaSeq.push_back(led.delta * l1fKfin);

  const double l1fStar = fourier_norm_l1(out.fStar, outD).value;
  out.checks.push_back(make_check("fStar <= thetaStar f / K", l1fStar,
                                  led.thetaStar * l1f / K, kSlack));
  out.checks.push_back(
      make_check("low non-lattice residue <= (thetaStar/8)^K 8 f / (e K)", l1fKfin,
                 std::pow(led.thetaStar / 8, K) * 8 * l1f / (M_E * K), kSlack));
  Series gdrift = series_add(out.g, project_lattice(f, lam), -1.0);
  const double l1gdrift = fourier_norm_l1(gdrift, outD).value;
  out.checks.push_back(make_check("g minus lattice part of f <= thetaStar f / K",
                                  l1gdrift, led.thetaStar * l1f / K, kSlack));
  const double sbar = std::min(s / 2, std::log(8 / led.thetaStar));
  Domain halfStrip{dom.balls, r / 2, s / 2};
  const double l1ss = fourier_norm_l1(out.fStarStar, halfStrip).value;
  out.checks.push_back(
      make_check("exponentially small remainder at half strip", l1ss,
                 2 * std::exp(-(K - 2) * sbar) * l1f, kSlack));
  out.checks.push_back(make_check("action displacement sum <= thetaStar r / (128 K)",
                                  out.dispY, led.thetaStar * r / (128.0 * K), kSlack));
  out.checks.push_back(
      make_check("angle displacement sum <= thetaStar s / (16 K^2)", out.dispX,
                 led.thetaStar * s / (16.0 * K * K), kSlack));

  out.norms.push_back({"g", fourier_norm_l1(out.g, outD)});
  out.norms.push_back({"fStar", fourier_norm_l1(out.fStar, outD)});
  out.norms.push_back({"fStarStar (half strip)", fourier_norm_l1(out.fStarStar, halfStrip)});
  out.norms.push_back({"g minus lattice part of f", fourier_norm_l1(gdrift, outD)});
  out.norms.push_back({"final low non-lattice residue", fourier_norm_l1(finSplit.fK, outD)});
  return out;
}

PhasePoint hamiltonian_flow(const Series& F, const PhasePoint& p0, double t,
                            int steps) {
  const int n = F.dim();
  if (steps < 1) throw std::invalid_argument("hamiltonian_flow: steps < 1");
  if (p0.y.size() != n || p0.x.size() != n)
    throw std::invalid_argument("hamiltonian_flow: point dimension mismatch");
  std::vector<Series> Fx, Fy;
  Fx.reserve(n);
  Fy.reserve(n);
  for (int j = 0; j < n; ++j) {
    Fx.push_back(derivative_x(F, j));
    Fy.push_back(derivative_y(F, j));
  }
  const VectorXd zeroIm = VectorXd::Zero(n);
  auto rhs = [&](const VectorXd& y, const VectorXd& x, VectorXd& dy, VectorXd& dx) {
    VectorXcd yc = y.cast<cplx>();
    for (int j = 0; j < n; ++j) {
      dy[j] = -Fx[j].evaluate(yc, x, zeroIm).real();
      dx[j] = Fy[j].evaluate(yc, x, zeroIm).real();
    }
  };
  const double hstep = t / steps;
  VectorXd y = p0.y, x = p0.x;
  VectorXd k1y(n), k1x(n), k2y(n), k2x(n), k3y(n), k3x(n), k4y(n), k4x(n);
  for (int i = 0; i < steps; ++i) {
    rhs(y, x, k1y, k1x);
    rhs(y + 0.5 * hstep * k1y, x + 0.5 * hstep * k1x, k2y, k2x);
    rhs(y + 0.5 * hstep * k2y, x + 0.5 * hstep * k2x, k3y, k3x);
    rhs(y + hstep * k3y, x + hstep * k3x, k4y, k4x);
    y += (hstep / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y);
    x += (hstep / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x);
  }
  return {y, x};
}

PhasePoint apply_transformation(const std::vector<Series>& generators,
                                const PhasePoint& p, int stepsPerFlow) {
  PhasePoint q = p;
  for (auto it = generators.rbegin(); it != generators.rend(); ++it) {
    if (it->empty()) continue;
    q = hamiltonian_flow(*it, q, 1.0, stepsPerFlow);
  }
  return q;
}

namespace {

std::vector<CheckResult> assumption_checks(const CoveringParams& p, int n, double eps,
                                           double rAnalyt, double s, bool* met) {
  std::vector<CheckResult> cs;
  const double alphaRef = std::sqrt(eps) * std::pow(double(p.K2), p.nu);
  cs.push_back(make_check("alpha = sqrt(eps) K2^nu", std::abs(p.alpha - alphaRef),
                          1e-9 * alphaRef));
  cs.push_back(make_check("6 <= 3 K1", 6.0, 3.0 * p.K1));
  cs.push_back(make_check("3 K1 <= K2", 3.0 * p.K1, double(p.K2)));
  cs.push_back(make_check("n+2 <= nu", double(n + 2), p.nu));
  cs.push_back(make_check("eps <= (L r)^2 / K2^(2 nu)", eps,
                          std::pow(p.L * rAnalyt, 2) /
                              std::pow(double(p.K2), 2.0 * p.nu)));
  cs.push_back(make_check(
      "2^(13+n) n^n L e^(s/2) / s^(n+1) <= K2^(2 nu - n - 4)",
      std::pow(2.0, 13 + n) * std::pow(double(n), n) * p.L * std::exp(s / 2) /
          std::pow(s, n + 1),
      std::pow(double(p.K2), 2.0 * p.nu - n - 4)));
  cs.push_back(make_check("zone radius sqrt(eps) K2^nu / L within analyticity",
                          std::sqrt(eps) * std::pow(double(p.K2), p.nu) / p.L,
                          rAnalyt));
  bool ok = true;
  for (const auto& c : cs) ok = ok && c.pass;
  *met = ok;
  return cs;
}

void zero_average_check(const Series& fss, const LatticeSpec& lam,
                        const std::string& name, std::vector<CheckResult>* out) {
  double bad = 0;
  const int n = fss.dim();
  for (ModeKey m : fss.sorted_modes())
    if (lam.contains(m, n) && !fss.find(m)->is_zero()) bad = 1;
  out->push_back(make_check(name, bad, 0.0));
}

}  // namespace

ZoneAveraging averaging_nonresonant(const Series& h, const Series& f, double eps,
                                    const CoveringParams& p,
                                    const std::vector<VectorXd>& centers,
                                    double rAnalyt, double s, double tailTol) {
  const int n = h.dim();
  if (f.dim() != n) throw std::invalid_argument("averaging_nonresonant: dimensions");
  if (!(eps > 0) || !(s > 0) || !(rAnalyt > 0))
    throw std::invalid_argument("averaging_nonresonant: eps, rAnalyt, s must be positive");
  if (centers.empty())
    throw std::invalid_argument("averaging_nonresonant: no centers given");
  p.validate(true);

  ZoneAveraging out;
  out.eps = eps;
  out.alpha = p.alpha;
  out.hypothesisChecks = assumption_checks(p, n, eps, rAnalyt, s, &out.hypothesesMet);

  FrequencyMap om = omega_of(h);
  for (const VectorXd& c : centers)
    if (!in_omega0(om(c), p))
      throw CoveringGap("averaging_nonresonant: center outside the non-resonant zone");

  out.rCore = p.alpha / (4 * p.L * p.K1);
  out.sIn = s * (1 - 1.0 / p.K1);
  out.alphaEff = p.alpha / 4;
  Domain dom;
  dom.r = out.rCore;
  dom.s = out.sIn;
  for (const VectorXd& c : centers) dom.balls.push_back({c, 0.0});

  out.core = normal_form(h, series_scale(f, eps), LatticeSpec::zero(), p.K1, dom,
                         out.alphaEff, tailTol);
  out.g = series_scale(out.core.g, 1.0 / eps);
  out.fStarStar = series_scale(out.core.fStarStar, 1.0 / eps);

  out.thetaBound = 16384.0 * std::pow(double(n), 2 * n) * p.L /
                   (std::pow(s, 2 * n + 1) *
                    std::pow(double(p.K2), 2.0 * p.nu - 2 * n - 3));
  // the zone bounds are stated for a unit perturbation; scale them by the
  // norm of f on the full analyticity domain
  const double normF = fourier_norm_l1(f, Domain{dom.balls, rAnalyt, s}).value;
  Domain half{dom.balls, out.rCore / 2, out.core.domainOut.s};
  Series gdrift = series_add(out.g, project_lattice(f, LatticeSpec::zero()), -1.0);
  out.checks.push_back(make_check("sampled sup of g minus angle average of f",
                                  sup_norm_sampled(gdrift, half).value,
                                  out.thetaBound * normF));
  out.checks.push_back(make_check("norm of g minus angle average of f",
                                  fourier_norm_l1(gdrift, half).value,
                                  out.thetaBound * normF, kSlack));
  Domain rem{dom.balls, out.rCore / 2, out.sIn / 2};
  out.checks.push_back(
      make_check("remainder <= 2 (2 n K1 / s)^n exp(-(K1 - 3) s / 2) f",
                 fourier_norm_l1(out.fStarStar, rem).value,
                 2 * std::pow(2.0 * n * p.K1 / s, n) *
                     std::exp(-(p.K1 - 3) * s / 2) * normF,
                 kSlack));
  zero_average_check(out.fStarStar, LatticeSpec::zero(),
                     "remainder angle average is zero", &out.checks);
  out.checks.push_back(make_check("engine smallness <= e^(-s/2)",
                                  out.core.ledger.thetaStar, std::exp(-s / 2),
                                  kSlack));
  return out;
}

ZoneAveraging averaging_at_simple_resonance(const Series& h, const Series& f,
                                            double eps, const VectorXi& k,
                                            const CoveringParams& p,
                                            const std::vector<VectorXd>& centers,
                                            double rAnalyt, double s,
                                            double tailTol) {
  const int n = h.dim();
  if (f.dim() != n || k.size() != n)
    throw std::invalid_argument("averaging_at_simple_resonance: dimensions");
  if (!is_generator(k))
    throw std::invalid_argument("averaging_at_simple_resonance: k must be a generator");
  if (!(eps > 0) || !(s > 0) || !(rAnalyt > 0))
    throw std::invalid_argument(
        "averaging_at_simple_resonance: eps, rAnalyt, s must be positive");
  if (centers.empty())
    throw std::invalid_argument("averaging_at_simple_resonance: no centers given");
  p.validate(true);

  ZoneAveraging out;
  out.eps = eps;
  out.alpha = p.alpha;
  out.k = k;
  out.hypothesisChecks = assumption_checks(p, n, eps, rAnalyt, s, &out.hypothesesMet);

  FrequencyMap om = omega_of(h);
  for (const VectorXd& c : centers)
    if (!in_omega1k(om(c), k, p))
      throw CoveringGap(
          "averaging_at_simple_resonance: center outside the simple-resonance zone");

  const double kn = std::sqrt(double(k.squaredNorm()));
  out.rCore = p.alpha / (p.L * kn);
  out.alphaEff = p.alpha * p.K2 / kn;
  out.sIn = s * (1 - 1.0 / p.K2);
  Domain dom;
  dom.r = out.rCore;
  dom.s = out.sIn;
  for (const VectorXd& c : centers) dom.balls.push_back({c, 0.0});

  LatticeSpec line = LatticeSpec::line(k);
  out.core = normal_form(h, series_scale(f, eps), line, p.K2, dom, out.alphaEff,
                         tailTol);
  out.g = series_scale(out.core.g, 1.0 / eps);
  out.fStarStar = series_scale(out.core.fStarStar, 1.0 / eps);

  out.thetaBound = std::pow(2.0, 2 * n + 10) * std::pow(double(n), 2 * n) * p.L /
                   (std::pow(s, 2 * n + 1) *
                    std::pow(double(p.K2), 2.0 * p.nu - 2 * n - 3));
  // parameter-level contraction majorant for this zone; under the cutoff
  // hypotheses it sits below e^(-s/2)
  const double thetaK = 2048.0 * p.L * p.K2 * p.K2 * kn * kn * eps *
                        fourier_norm_l1(f, dom).value /
                        (p.alpha * p.alpha * out.sIn);
  out.checks.push_back(
      make_check("zone contraction majorant <= e^(-s/2)", thetaK, std::exp(-s / 2),
                 kSlack));

  const double normF = fourier_norm_l1(f, Domain{dom.balls, rAnalyt, s}).value;
  Domain gdom{dom.balls, out.rCore / 2, out.core.domainOut.s};
  Series gdrift = series_add(out.g, project_lattice(f, line), -1.0);
  out.checks.push_back(make_check("norm of g minus resonant part of f",
                                  fourier_norm_l1(gdrift, gdom).value,
                                  out.thetaBound * normF, kSlack));
  Domain rem{dom.balls, out.rCore / 2, out.sIn / 2};
  out.checks.push_back(
      make_check("remainder < 2 (2 n K2 / s)^n exp(-(K2 - 3) s / 2) f",
                 fourier_norm_l1(out.fStarStar, rem).value,
                 2 * std::pow(2.0 * n * p.K2 / s, n) *
                     std::exp(-(p.K2 - 3) * s / 2) * normF,
                 kSlack));
  zero_average_check(out.fStarStar, line, "resonant part of remainder is zero",
                     &out.checks);
  return out;
}

std::string normal_form_json(const NormalFormResult& nf) {
  using ordered = nlohmann::ordered_json;
  auto domain_json = [](const Domain& d) {
    ordered balls = ordered::array();
    for (const Ball& b : d.balls)
      balls.push_back({{"c", std::vector<double>(b.c.data(), b.c.data() + b.c.size())},
                       {"R", b.R}});
    return ordered{{"r", d.r}, {"s", d.s}, {"balls", balls}};
  };
  ordered j;
  j["K"] = nf.K;
  if (nf.lattice.kind == LatticeSpec::Zero) {
    j["lattice"] = "zero";
  } else {
    j["lattice"] = "line " + fmt_mode(nf.lattice.k);
  }
  j["thetaLedger"] = ordered{{"thetaStar", nf.ledger.thetaStar},
                             {"thetaMinus1", nf.ledger.thetaMinus1},
                             {"theta0", nf.ledger.theta0},
                             {"delta", nf.ledger.delta},
                             {"thetaSeq", nf.ledger.thetaSeq}};
  j["domainIn"] = domain_json(nf.domainIn);
  j["domainOut"] = domain_json(nf.domainOut);
  j["displacement"] = ordered{{"action", nf.dispY}, {"angle", nf.dispX}};
  j["discardedTail"] = nf.fFinal.discarded;
  ordered steps = ordered::array();
  for (const StepRecord& st : nf.steps)
    steps.push_back(ordered{{"index", st.index},
                            {"r", st.r},
                            {"s", st.s},
                            {"theta", st.theta},
                            {"fKNorm", st.fKNorm},
                            {"phiNorm", st.phiNorm},
                            {"fStarNorm", st.fStarNorm},
                            {"lieOrderMain", st.orderMain},
                            {"lieOrderFlat", st.orderFlat},
                            {"residual", st.residual},
                            {"dispAction", st.dispY},
                            {"dispAngle", st.dispX}});
  j["steps"] = steps;
  ordered norms = ordered::array();
  for (const auto& [name, nv] : nf.norms) {
    const char* kind = nv.kind == NormKind::sup ? "sup"
                       : nv.kind == NormKind::ellInfFourier ? "linfFourier"
                                                            : "l1Fourier";
    norms.push_back(ordered{{"name", name},
                            {"value", nv.value},
                            {"kind", kind},
                            {"rigor", nv.rigor == Rigor::upperBound
                                          ? "upperBound"
                                          : "sampledEstimate"}});
  }
  j["norms"] = norms;
  ordered checks = ordered::array();
  for (const CheckResult& c : nf.checks)
    checks.push_back(ordered{
        {"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}});
  j["checks"] = checks;
  return j.dump(2);
}

void step_norms_csv(std::ostream& os, const NormalFormResult& nf) {
  os << "step,r,s,theta,fK_norm,phi_norm,fStar_norm,lie_order_main,lie_order_flat,"
        "residual,disp_action,disp_angle\n";
  os << std::setprecision(17);
  for (const StepRecord& st : nf.steps)
    os << st.index << ',' << st.r << ',' << st.s << ',' << st.theta << ','
       << st.fKNorm << ',' << st.phiNorm << ',' << st.fStarNorm << ','
       << st.orderMain << ',' << st.orderFlat << ',' << st.residual << ','
       << st.dispY << ',' << st.dispX << '\n';
}

}  // namespace resavg
