// K^Bernoulli evaluation, the enumeration oracle, and the rescaled comparison
// against the Pearcey kernel.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "detail.hpp"
#include "pk/error.hpp"
#include "pk/kernels.hpp"
#include "pk/nbrw.hpp"
#include "pk/quadrature.hpp"

namespace pk {

using detail::cplx;
using detail::kPi;
using detail::log_sin_pi;

namespace {

struct Setup {
  int64_t t1, x1, t2, x2;
  const std::vector<int64_t>* d;
  double lq;  // log(beta/(1-beta))
};

// log[(z-x2+1)_{t2-1} prod(z-d_i) q^z / sin(pi z)]
cplx log_Z(const Setup& s, cplx z) {
  cplx acc = 0;
  for (int64_t k = 0; k + 1 < s.t2; ++k) acc += std::log(z - static_cast<double>(s.x2 - 1 - k));
  for (int64_t di : *s.d) acc += std::log(z - static_cast<double>(di));
  return acc + z * s.lq - log_sin_pi(z);
}

// log[sin(pi w) q^{-w} / ((w-x1)_{t1+1} prod(w-d_i))]
cplx log_H(const Setup& s, cplx w) {
  cplx acc = log_sin_pi(w) - w * s.lq;
  for (int64_t k = 0; k <= s.t1; ++k) acc -= std::log(w - static_cast<double>(s.x1 - k));
  for (int64_t di : *s.d) acc -= std::log(w - static_cast<double>(di));
  return acc;
}

int parity(int64_t v) { return static_cast<int>(((v % 2) + 2) % 2); }

std::vector<size_t> pole_set(const Setup& s) {
  std::vector<size_t> P;
  for (size_t k = 0; k < s.d->size(); ++k) {
    const int64_t m = (*s.d)[k];
    if (m >= s.x1 - s.t1 && m <= s.x1) P.push_back(k);
  }
  return P;
}

void check_z_line(const Setup& s, double c) {
  const double frac = c - std::floor(c);
  if (std::abs(frac - 0.5) > 1e-12) fail(Errc::InvalidArgument, "z line must sit at a half-integer");
  const double c0 = static_cast<double>(s.x2 - s.t2) + 0.5;
  const int64_t lo = static_cast<int64_t>(std::ceil(std::min(c, c0)));
  const int64_t hi = static_cast<int64_t>(std::floor(std::max(c, c0)));
  const std::set<int64_t> dset(s.d->begin(), s.d->end());
  for (int64_t j = lo; j <= hi; ++j) {
    const bool zero = dset.count(j) || (j >= s.x2 - s.t2 + 1 && j <= s.x2 - 1);
    if (!zero) fail(Errc::InvalidArgument, "moving the z line would cross a pole");
  }
}

// Residues R_k of the w-integrand at the poles, as (log|R|, sign).
struct Residues {
  std::vector<double> logr;
  std::vector<double> sign;
  std::vector<double> pos;
  double max = -INFINITY;
};

Residues residues(const Setup& s, const std::vector<size_t>& P) {
  Residues r;
  const auto& d = *s.d;
  for (size_t k : P) {
    const int64_t m = d[k];
    const int64_t j0 = s.x1 - m;
    const int64_t greater = static_cast<int64_t>(d.size() - 1 - k);
    double l = std::log(kPi) - static_cast<double>(m) * s.lq - std::lgamma(static_cast<double>(j0) + 1) -
               std::lgamma(static_cast<double>(s.t1 - j0) + 1);
    for (size_t i = 0; i < d.size(); ++i)
      if (i != k) l -= std::log(std::abs(static_cast<double>(m - d[i])));
    r.logr.push_back(l);
    r.sign.push_back(parity(m + j0 + greater) ? -1.0 : 1.0);
    r.pos.push_back(static_cast<double>(m));
    r.max = std::max(r.max, l);
  }
  return r;
}

double log_pref(const Setup& s) {
  return std::lgamma(static_cast<double>(s.t1) + 1) - std::lgamma(static_cast<double>(s.t2));
}

struct Partial {
  cplx value;
  int64_t nodes;
  double peak;
};

// (t1!/(t2-1)!) (1/pi) int_0^inf Re[Z S](c+iy) dy by the trapezoid rule.
Partial residue_pass(const Setup& s, const Residues& R, double c, double h) {
  const double deg = static_cast<double>(s.t2 - 1) + static_cast<double>(s.d->size());
  const double y_safe = std::max(5.0, deg / kPi + 1.0);
  const double lp = log_pref(s);
  detail::LogSum acc;
  double peak = -INFINITY, peak_all = -INFINITY;
  int64_t nodes = 0;
  for (int64_t j = 0;; ++j) {
    const double y = static_cast<double>(j) * h;
    const cplx z(c, y);
    cplx S = 0;
    for (size_t k = 0; k < R.logr.size(); ++k) S += R.sign[k] * std::exp(R.logr[k] - R.max) / (R.pos[k] - z);
    const cplx lz = log_Z(s, z);
    const cplx L = lz + R.max + std::log(S) + lp;
    peak = std::max(peak, L.real());
    peak_all = std::max({peak_all, lz.real(), R.max});
    acc.add(j == 0 ? 0.5 * h : h, L);
    ++nodes;
    if (nodes > (1 << 20)) fail(Errc::QuadratureNonConvergence, "z-line quadrature exceeded 2^20 nodes");
    if (y > y_safe && L.real() < peak - 40) break;
  }
  return {cplx(acc.value().real() / kPi, 0), nodes, peak_all};
}

// Loop form: closed kites around the poles either side of the z line, which
// is truncated 40 nats below its peak.
struct Side {
  bool present = false;
  double v = 0;         // vertex on the real axis
  double far = 0;       // outermost pole
  double delta = 0;
  int dir = 1;          // +1 right kite, -1 left kite
};

cplx ray(double theta) { return std::polar(1.0, theta); }

double kite_objective(const Setup& s, const Side& sd, double R) {
  const double th = sd.dir > 0 ? -kPi / 4 : 3 * kPi / 4;
  const cplx tip = sd.v + R * ray(th);
  const cplx Q(sd.far + 0.5 * sd.dir, 0);
  double m = log_H(s, tip).real();
  for (int k = 1; k < 16; ++k) m = std::max(m, log_H(s, tip + (Q - tip) * (k / 16.0)).real());
  return m;
}

std::vector<PathNode> kite_nodes(const Setup& s, const Side& sd, int order, double h) {
  // Choose the arm length minimizing the largest magnitude on the far part.
  const double rmax = std::sqrt(2.0) * (std::abs(sd.far - sd.v) + 2.0);
  const double rmin = std::max(2.0 * sd.delta, 2.0);
  double bestR = rmin, bestv = INFINITY;
  const int cand = 24;
  for (int k = 0; k <= cand; ++k) {
    const double R = rmin * std::pow(std::max(rmax / rmin, 1.0), static_cast<double>(k) / cand);
    const double v = kite_objective(s, sd, R);
    if (v < bestv - 1e-9) {
      bestv = v;
      bestR = R;
    }
  }
  const double th1 = sd.dir > 0 ? -kPi / 4 : 3 * kPi / 4;
  const double th2 = sd.dir > 0 ? kPi / 4 : -3 * kPi / 4;
  const cplx v(sd.v, 0);
  const cplx tipA = v + bestR * ray(th1), tipB = v + bestR * ray(th2);
  const cplx Q(sd.far + 0.5 * sd.dir, 0);
  const bool grade = sd.delta < 2;
  const double hmin = sd.delta / 16;
  auto seg = [&](cplx a, cplx b, bool ga, bool gb) {
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / h)));
    return segment_nodes(a, b, order, panels, ga, gb, hmin);
  };
  std::vector<PathNode> out;
  for (auto part : {seg(v, tipA, grade, false), seg(tipA, Q, false, false), seg(Q, tipB, false, false),
                    seg(tipB, v, false, grade)})
    out.insert(out.end(), part.begin(), part.end());
  return out;
}

double z_extent(const Setup& s, double c, double step) {
  const double deg = static_cast<double>(s.t2 - 1) + static_cast<double>(s.d->size());
  const double y_safe = std::max(5.0, deg / kPi + 1.0);
  double peak = log_Z(s, cplx(c, 0)).real();
  double y = 0;
  for (;;) {
    y += step;
    const double l = log_Z(s, cplx(c, y)).real();
    peak = std::max(peak, l);
    if (l < peak - 40) {
      // Confirm there is no later rebound up to the safe bound.
      bool ok = true;
      for (double yy = 2 * y; yy < 2 * y_safe; yy *= 1.5)
        if (log_Z(s, cplx(c, yy)).real() > peak - 40) {
          ok = false;
          y = yy;
          break;
        }
      if (ok) return y;
    }
    if (y > 1e7) fail(Errc::QuadratureNonConvergence, "z-line integrand does not decay");
  }
}

Partial loop_pass(const Setup& s, const std::vector<Side>& sides, double c, double Y, double h, int order) {
  double dmin = INFINITY;
  for (const auto& sd : sides)
    if (sd.present) dmin = std::min(dmin, sd.delta);
  const bool grade = dmin < 2;
  const int zp = std::max(2, static_cast<int>(std::ceil(2 * Y / h)));
  // Split at y = 0 so grading can hug the vertex level.
  std::vector<PathNode> zn = segment_nodes(cplx(c, -Y), cplx(c, 0), order, std::max(1, zp / 2), false, grade, dmin / 16);
  const auto zn2 = segment_nodes(cplx(c, 0), cplx(c, Y), order, std::max(1, zp / 2), grade, false, dmin / 16);
  zn.insert(zn.end(), zn2.begin(), zn2.end());
  std::vector<PathNode> wn;
  for (const auto& sd : sides)
    if (sd.present) {
      const auto k = kite_nodes(s, sd, order, h);
      wn.insert(wn.end(), k.begin(), k.end());
    }
  std::vector<cplx> lz(zn.size()), lw(wn.size());
  double zmax = -INFINITY, wmax = -INFINITY;
  for (size_t j = 0; j < zn.size(); ++j) {
    lz[j] = log_Z(s, zn[j].z);
    zmax = std::max(zmax, lz[j].real());
  }
  for (size_t k = 0; k < wn.size(); ++k) {
    lw[k] = log_H(s, wn[k].z);
    wmax = std::max(wmax, lw[k].real());
  }
  std::vector<std::pair<cplx, cplx>> A, B;  // (point, scaled weight)
  for (size_t j = 0; j < zn.size(); ++j) {
    const cplx a = zn[j].dz * std::exp(lz[j] - zmax);
    if (std::abs(a) > 1e-22 * std::abs(zn[j].dz)) A.emplace_back(zn[j].z, a);
  }
  for (size_t k = 0; k < wn.size(); ++k) {
    const cplx b = wn[k].dz * std::exp(lw[k] - wmax);
    if (std::abs(b) > 1e-22 * std::abs(wn[k].dz)) B.emplace_back(wn[k].z, b);
  }
  cplx sum = 0;
  for (const auto& [z, a] : A) {
    cplx inner = 0;
    for (const auto& [w, b] : B) inner += b / (w - z);
    sum += a * inner;
  }
  const cplx two_pi_i(0, 2 * kPi);
  const cplx L = std::log(sum / (two_pi_i * two_pi_i)) + log_pref(s) + zmax + wmax;
  return {std::exp(L), static_cast<int64_t>(zn.size() + wn.size()), std::max(zmax, wmax)};
}

}  // namespace

double bernoulli_binomial_term(const SpaceTimePoint& p1, const SpaceTimePoint& p2) {
  const int64_t dt = p1.t - p2.t, dx = p1.x - p2.x;
  if (dt <= 0 || dx < 0 || dx > dt) return 0.0;
  const double lb = std::lgamma(static_cast<double>(dt) + 1) - std::lgamma(static_cast<double>(dx) + 1) -
                    std::lgamma(static_cast<double>(dt - dx) + 1);
  return (parity(dx + 1) ? -1.0 : 1.0) * std::exp(lb);
}

KernelValue kernel_bernoulli(const SpaceTimePoint& p1, const SpaceTimePoint& p2, const ParticleConfig& d,
                             double beta, const BernoulliOptions& opt) {
  if (p1.t < 1 || p2.t < 1) fail(Errc::InvalidArgument, "kernel times must be >= 1");
  if (!(beta > 0 && beta < 1)) fail(Errc::InvalidArgument, "beta must lie in (0,1)");
  validate_config(d);
  const Setup s{p1.t, p1.x, p2.t, p2.x, &d.pos, std::log(beta / (1 - beta))};
  KernelValue kv;
  const double bin = bernoulli_binomial_term(p1, p2);
  const auto P = pole_set(s);
  kv.pole_count = static_cast<int>(P.size());
  if (P.empty()) {
    kv.value = bin;
    kv.empty_pole_set = true;
    kv.method = "binomial";
    return kv;
  }
  const double c = opt.z_line.value_or(static_cast<double>(p2.x - p2.t) + 0.5);
  check_z_line(s, c);
  BernoulliMethod method = opt.method;
  if (method == BernoulliMethod::Auto)
    method = (d.size() <= 40 && p1.t <= 80 && p2.t <= 80) ? BernoulliMethod::Residue : BernoulliMethod::Loop;

  if (method == BernoulliMethod::Residue) {
    const Residues R = residues(s, P);
    double h = 0.1;
    Partial prev = residue_pass(s, R, c, h);
    for (int it = 0; it < 14; ++it) {
      h /= 2;
      const Partial cur = residue_pass(s, R, c, h);
      const double diff = std::abs(cur.value - prev.value);
      if (diff <= std::max(opt.rel_tol * std::abs(cur.value), 1e-14)) {
        kv.value = bin + cur.value;
        kv.abs_error_estimate = diff;
        kv.nodes = cur.nodes;
        kv.peak_log = cur.peak;
        kv.method = "residue";
        return kv;
      }
      prev = cur;
    }
    fail(Errc::QuadratureNonConvergence, "trapezoid refinement did not settle");
  }

  // Loop form: kites either side of the line.
  std::vector<Side> sides(2);
  for (size_t k : P) {
    const double m = static_cast<double>(d.pos[k]);
    Side& sd = m > c ? sides[0] : sides[1];
    sd.dir = m > c ? 1 : -1;
    if (!sd.present) {
      sd.present = true;
      sd.far = m;
      sd.delta = std::abs(m - c);  // nearest so far (poles are sorted)
    }
    if (sd.dir > 0) {
      sd.far = std::max(sd.far, m);
      sd.delta = std::min(sd.delta, m - c);
    } else {
      sd.far = std::min(sd.far, m);
      sd.delta = std::min(sd.delta, c - m);
    }
  }
  double hbase = INFINITY;
  for (auto& sd : sides) {
    if (!sd.present) continue;
    double dl = std::min(0.5 * sd.delta, 0.1 * std::pow(static_cast<double>(p1.t), 0.75) + 0.5);
    if (dl >= 1) dl = std::round(dl);
    sd.delta = dl;
    sd.v = c + sd.dir * dl;
    hbase = std::min(hbase, std::max(0.5, dl / 2));
  }
  const double Y = z_extent(s, c, hbase);
  const int order = 20;
  Partial prev = loop_pass(s, sides, c, Y, hbase, order);
  double h = hbase;
  for (int it = 0; it < 4; ++it) {
    h /= 2;
    const Partial cur = loop_pass(s, sides, c, Y, h, order);
    const double diff = std::abs(cur.value - prev.value);
    if (diff <= std::max(opt.rel_tol * std::abs(cur.value), 1e-12) || it == 3) {
      if (diff > 1e-6 * std::max(1.0, std::abs(cur.value)))
        fail(Errc::QuadratureNonConvergence, "loop-contour refinement did not settle");
      kv.value = bin + cur.value.real();
      kv.abs_error_estimate = diff + std::abs(cur.value.imag());
      kv.nodes = cur.nodes;
      kv.peak_log = cur.peak;
      kv.method = "loop";
      return kv;
    }
    prev = cur;
  }
  fail(Errc::QuadratureNonConvergence, "loop-contour refinement did not settle");
}

double correlation_determinant(const std::vector<SpaceTimePoint>& pts, const ParticleConfig& d, double beta) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  if (m == 0) return 1.0;
  Eigen::MatrixXd K(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      K(a, b) = kernel_bernoulli(pts[static_cast<size_t>(a)], pts[static_cast<size_t>(b)], d, beta).value.real();
  return K.determinant();
}

namespace {

struct Enumerator {
  double beta;
  int64_t horizon;
  std::map<int64_t, std::set<int64_t>> required;  // time -> positions
  int64_t branches = 0;
  double total = 0;

  bool satisfies(const ParticleConfig& c, int64_t t) const {
    auto it = required.find(t);
    if (it == required.end()) return true;
    for (int64_t x : it->second)
      if (!std::binary_search(c.pos.begin(), c.pos.end(), x)) return false;
    return true;
  }

  void successors(const ParticleConfig& x, size_t i, ParticleConfig& y, std::vector<ParticleConfig>& out) {
    if (i == x.pos.size()) {
      if (++branches > 10000000) fail(Errc::TooLarge, "more than 10^7 trajectory branches");
      out.push_back(y);
      return;
    }
    for (int e = 0; e <= 1; ++e) {
      y.pos[i] = x.pos[i] + e;
      if (i > 0 && y.pos[i] <= y.pos[i - 1]) continue;
      successors(x, i + 1, y, out);
    }
  }

  void dfs(const ParticleConfig& x, int64_t t, double w) {
    if (t == horizon) {
      total += w;
      return;
    }
    std::vector<ParticleConfig> next;
    ParticleConfig y = x;
    successors(x, 0, y, next);
    for (const auto& c : next) {
      if (!satisfies(c, t + 1)) continue;
      const double p = transition_weight(x, c, beta);
      if (p > 0) dfs(c, t + 1, w * p);
    }
  }
};

}  // namespace

double brute_force_correlations(const ParticleConfig& d, double beta, int64_t T,
                                const std::vector<SpaceTimePoint>& points) {
  validate_config(d);
  if (!(beta > 0 && beta < 1)) fail(Errc::InvalidArgument, "beta must lie in (0,1)");
  Enumerator en{beta, 0, {}, 0, 0};
  for (const auto& p : points) {
    if (p.t < 1 || p.t > T) fail(Errc::InvalidArgument, "points must have 1 <= t <= T");
    en.required[p.t].insert(p.x);
    en.horizon = std::max(en.horizon, p.t);
  }
  for (const auto& [t, xs] : en.required)
    if (xs.size() > d.size()) return 0.0;
  if (en.horizon == 0) return 1.0;
  en.dfs(d, 0, 1.0);
  return en.total;
}

RescaledPair rescaled_kernel_pair(double tau1, double gamma1, double tau2, double gamma2, int64_t n,
                                  const SlopeField& field, const CuspData& cusp) {
  const int64_t M = (2 * n) / 3;
  const ParticleConfig d = quantile_initial(field.density(), n, M, M);
  return rescaled_kernel_pair(tau1, gamma1, tau2, gamma2, n, d, cusp);
}

RescaledPair rescaled_kernel_pair(double tau1, double gamma1, double tau2, double gamma2, int64_t n,
                                  const ParticleConfig& d, const CuspData& cusp) {
  if (n < 1) fail(Errc::InvalidArgument, "n must be positive");
  const double A = cusp.A, B = cusp.B;
  if (!(A > 0 && B > 0 && B < 1)) fail(Errc::InvalidArgument, "cusp scales must have A > 0, 0 < B < 1");
  const double nd = static_cast<double>(n), rn = std::sqrt(nd), qn = std::pow(nd, 0.25);
  RescaledPair out;
  auto place = [&](double tau, double gamma, SpaceTimePoint& p, double& te, double& ge) {
    p.t = std::llround(nd * cusp.t_c + rn * tau);
    te = (static_cast<double>(p.t) - nd * cusp.t_c) / rn;
    p.x = std::llround(nd * cusp.x_c + B * rn * te + qn * gamma);
    ge = (static_cast<double>(p.x) - nd * cusp.x_c - B * rn * te) / qn;
    if (p.t < 1) fail(Errc::InvalidArgument, "rounded time is not positive");
  };
  place(tau1, gamma1, out.p1, out.tau1, out.gamma1);
  place(tau2, gamma2, out.p2, out.tau2, out.gamma2);
  BernoulliOptions opt;
  opt.method = BernoulliMethod::Loop;
  opt.z_line = std::round(nd * cusp.z_c) + 0.5;
  KernelValue k = kernel_bernoulli(out.p1, out.p2, d, cusp.beta, opt);
  const int64_t dx = out.p1.x - out.p2.x, dt = out.p1.t - out.p2.t;
  const double lg = static_cast<double>(dx) * std::log(B) + static_cast<double>(dt - dx) * std::log(1 - B);
  const double gauge = (parity(dx) ? -1.0 : 1.0) * std::exp(lg);
  k.value *= gauge;
  k.abs_error_estimate *= std::abs(gauge);
  out.lhs = k;
  const double bb = B * (1 - B);
  out.pearcey_s = -out.tau1 / (2 * std::sqrt(A) * bb);
  out.pearcey_x = out.gamma1 / (std::sqrt(2.0) * std::pow(A, 0.25) * bb);
  out.pearcey_t = -out.tau2 / (2 * std::sqrt(A) * bb);
  out.pearcey_y = out.gamma2 / (std::sqrt(2.0) * std::pow(A, 0.25) * bb);
  KernelValue p = kernel_pearcey(out.pearcey_s, out.pearcey_x, out.pearcey_t, out.pearcey_y);
  const double scale = 1.0 / (std::sqrt(2.0) * qn * std::pow(A, 0.25) * bb);
  p.value *= scale;
  p.abs_error_estimate *= scale;
  out.rhs = p;
  return out;
}

PrefactorCheck prefactor_check(const SpaceTimePoint& p1, const SpaceTimePoint& p2, int64_t n, const CuspData& cusp) {
  if (n < 1 || p1.t < 1 || p2.t < 1) fail(Errc::InvalidArgument, "need n, t1, t2 >= 1");
  const double nd = static_cast<double>(n), B = cusp.B;
  const double z = (std::round(nd * cusp.z_c) + 0.5) / nd;
  const int64_t dx = p1.x - p2.x, dt = p1.t - p2.t;
  double ex = static_cast<double>(dx) * std::log(B) + static_cast<double>(dt - dx) * std::log(1 - B) +
              std::lgamma(static_cast<double>(p1.t) + 1) - std::lgamma(static_cast<double>(p2.t));
  for (int64_t j = p2.x - p2.t + 1; j <= p2.x - 1; ++j) ex += std::log(std::abs(z - static_cast<double>(j) / nd));
  for (int64_t j = p1.x - p1.t; j <= p1.x; ++j) ex -= std::log(std::abs(z - static_cast<double>(j) / nd));
  PrefactorCheck r;
  r.exact = ex;
  r.asymptotic = static_cast<double>(dt + 1) * std::log(nd) - std::log(cusp.t_c * B * (1 - B));
  return r;
}

BinomialGaussian binomial_gaussian_check(int64_t t1, int64_t x1, int64_t t2, int64_t x2, double B) {
  const int64_t dt = t1 - t2, dx = x1 - x2;
  if (dt <= 0 || dx < 0 || dx > dt) fail(Errc::OutOfSupport, "need t1 > t2 and 0 <= x1-x2 <= t1-t2");
  if (!(B > 0 && B < 1)) fail(Errc::InvalidArgument, "B must lie in (0,1)");
  const double T = static_cast<double>(dt), X = static_cast<double>(dx);
  BinomialGaussian r;
  r.exact = std::exp(X * std::log(B) + (T - X) * std::log(1 - B) + std::lgamma(T + 1) - std::lgamma(X + 1) -
                     std::lgamma(T - X + 1));
  const double v = B * (1 - B) * T;
  r.gaussian = std::exp(-(X - B * T) * (X - B * T) / (2 * v)) / std::sqrt(2 * kPi * v);
  return r;
}

}  // namespace pk
