#include "pk/nbrw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "pk/error.hpp"

namespace pk {

namespace {

using Quad = boost::multiprecision::number<boost::multiprecision::cpp_bin_float_quad::backend_type,
                                           boost::multiprecision::et_off>;

constexpr double kRatioSlack = 1e-8;

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) fail(Errc::InvalidArgument, "beta must lie in (0,1)");
}

}  // namespace

double log_transition_weight(const ParticleConfig& x, const ParticleConfig& y, double beta) {
  check_beta(beta);
  if (x.M != y.M || x.N != y.N || x.size() != y.size()) fail(Errc::LabelMismatch, "label ranges differ");
  const size_t k = x.size();
  const double ninf = -std::numeric_limits<double>::infinity();
  double lw = static_cast<double>(k) * std::log1p(-beta);
  const double lq = std::log(beta) - std::log1p(-beta);
  for (size_t i = 0; i < k; ++i) {
    const int64_t e = y.pos[i] - x.pos[i];
    if (e != 0 && e != 1) return ninf;
    lw += static_cast<double>(e) * lq;
  }
  // Both Vandermonde products share sign (-1)^{k(k-1)/2} when y is
  // non-decreasing, which it is given x increasing and steps in {0,1}; any
  // inversion is tracked explicitly anyway.
  int sign = 1;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      const int64_t dy = y.pos[j] - y.pos[i];
      const int64_t dx = x.pos[j] - x.pos[i];
      if (dy == 0) return ninf;
      if ((dy < 0) != (dx < 0)) sign = -sign;
      lw += std::log(std::abs(static_cast<double>(dy))) - std::log(std::abs(static_cast<double>(dx)));
    }
  }
  if (sign < 0) return ninf;  // cannot occur for valid x
  return lw;
}

double transition_weight(const ParticleConfig& x, const ParticleConfig& y, double beta) {
  const double lw = log_transition_weight(x, y, beta);
  return std::isinf(lw) ? 0.0 : std::exp(lw);
}

NbrwChain make_chain(ParticleConfig initial, double beta, uint64_t seed) {
  check_beta(beta);
  validate_config(initial);
  NbrwChain c;
  c.config = std::move(initial);
  c.beta = beta;
  c.rng.seed(seed);
  return c;
}

namespace {

// The jump set S of one step is an L-ensemble: P(S) = det(L_S)/det(I+L) with
//   unblocked row i:  L_ij = g_i / (x_i + 1 - x_j),
//                     g_i = q prod_{m != i} (x_i - x_m + 1)/(x_i - x_m),
//   blocked row i (x_{i+1} = x_i + 1):  L_{i,i+1} = -q prod_{m != i,i+1} (...),
// zero elsewhere; q = beta/(1-beta). (Cauchy determinant identity applied to
// the Vandermonde ratio; blocked rows force i in S => i+1 in S.)
template <class T>
std::vector<T> l_matrix(const std::vector<int64_t>& x, double beta) {
  const size_t k = x.size();
  const T lq = T(std::log(beta) - std::log1p(-beta));
  std::vector<T> L(k * k, T(0));
  for (size_t i = 0; i < k; ++i) {
    const bool blocked = i + 1 < k && x[i + 1] == x[i] + 1;
    T lg = lq;
    for (size_t m = 0; m < k; ++m) {
      if (m == i || (blocked && m == i + 1)) continue;
      const T a = T(x[i] - x[m]);
      using std::abs;
      using std::log;
      lg += log(abs(a + T(1))) - log(abs(a));
    }
    using std::exp;
    const T g = exp(lg);
    if (blocked) {
      L[i * k + i + 1] = -g;
    } else {
      for (size_t j = 0; j < k; ++j) L[i * k + j] = g / T(x[i] + 1 - x[j]);
    }
  }
  return L;
}

// In-place Gauss-Jordan inverse with partial pivoting; false if singular.
template <class T>
bool invert(std::vector<T>& a, size_t k) {
  std::vector<T> inv(k * k, T(0));
  for (size_t i = 0; i < k; ++i) inv[i * k + i] = T(1);
  for (size_t c = 0; c < k; ++c) {
    size_t p = c;
    using std::abs;
    for (size_t r = c + 1; r < k; ++r)
      if (abs(a[r * k + c]) > abs(a[p * k + c])) p = r;
    if (a[p * k + c] == T(0)) return false;
    if (p != c)
      for (size_t j = 0; j < k; ++j) {
        std::swap(a[p * k + j], a[c * k + j]);
        std::swap(inv[p * k + j], inv[c * k + j]);
      }
    const T d = T(1) / a[c * k + c];
    for (size_t j = 0; j < k; ++j) {
      a[c * k + j] *= d;
      inv[c * k + j] *= d;
    }
    for (size_t r = 0; r < k; ++r) {
      if (r == c || a[r * k + c] == T(0)) continue;
      const T f = a[r * k + c];
      for (size_t j = 0; j < k; ++j) {
        a[r * k + j] -= f * a[c * k + j];
        inv[r * k + j] -= f * inv[c * k + j];
      }
    }
  }
  a.swap(inv);
  return true;
}

// Marginal kernel K = I - (I + L)^{-1}, with row equilibration of I + L.
template <class T>
std::vector<T> marginal_kernel(const std::vector<int64_t>& x, double beta) {
  const size_t k = x.size();
  std::vector<T> a = l_matrix<T>(x, beta);
  for (size_t i = 0; i < k; ++i) a[i * k + i] += T(1);
  std::vector<T> s(k, T(1));
  for (size_t i = 0; i < k; ++i) {
    T m(0);
    using std::abs;
    for (size_t j = 0; j < k; ++j) m = std::max<T>(m, abs(a[i * k + j]));
    s[i] = T(1) / m;
    for (size_t j = 0; j < k; ++j) a[i * k + j] *= s[i];
  }
  if (!invert(a, k)) fail(Errc::NumericalDegeneracy, "I + L is singular");
  // (S(I+L))^{-1} = (I+L)^{-1} S^{-1}, so (I+L)^{-1} = a S.
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) a[i * k + j] = (i == j ? T(1) : T(0)) - a[i * k + j] * s[j];
  return a;
}

// Eigen specialization of the double path (much faster than the generic
// elimination for a few hundred particles).
std::vector<double> marginal_kernel_double(const std::vector<int64_t>& x, double beta) {
  const auto k = static_cast<Eigen::Index>(x.size());
  const std::vector<double> L = l_matrix<double>(x, beta);
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = L[static_cast<size_t>(i * k + j)] + (i == j ? 1.0 : 0.0);
  Eigen::VectorXd s = a.cwiseAbs().rowwise().maxCoeff().cwiseInverse();
  a = s.asDiagonal() * a;
  Eigen::MatrixXd inv = a.partialPivLu().inverse();
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(k, k) - inv * s.asDiagonal();
  std::vector<double> out(static_cast<size_t>(k * k));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out[static_cast<size_t>(i * k + j)] = K(i, j);
  return out;
}

// Sequential DPP sampling from a marginal kernel. Returns false (and leaves
// `jumps` unspecified) when a conditional leaves [-eps, 1+eps].
template <class T>
bool sample_from_kernel(std::vector<T> K, size_t k, const std::vector<double>& uniforms, std::vector<int>& jumps) {
  jumps.assign(k, 0);
  for (size_t j = 0; j < k; ++j) {
    const double p = static_cast<double>(K[j * k + j]);
    if (!(p >= -kRatioSlack && p <= 1.0 + kRatioSlack)) return false;
    const bool take = uniforms[j] < p;
    jumps[j] = take ? 1 : 0;
    T piv = K[j * k + j];
    if (!take) piv -= T(1);
    if (piv == T(0)) continue;  // probability-zero branch: nothing to condition
    for (size_t a = j + 1; a < k; ++a) {
      const T f = K[a * k + j] / piv;
      if (f == T(0)) continue;
      for (size_t b = j + 1; b < k; ++b) K[a * k + b] -= f * K[j * k + b];
    }
  }
  return true;
}

}  // namespace

ParticleConfig step_exact(NbrwChain& chain) {
  const auto& x = chain.config.pos;
  const size_t k = x.size();
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> u(k);
  for (auto& v : u) v = U(chain.rng);
  std::vector<int> jumps;
  bool ok = false;
  try {
    ok = sample_from_kernel(marginal_kernel_double(x, chain.beta), k, u, jumps);
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) {
    // Same uniforms, extended precision.
    if (!sample_from_kernel(marginal_kernel<Quad>(x, chain.beta), k, u, jumps))
      fail(Errc::NumericalDegeneracy, "conditional jump probability outside [0,1] in extended precision");
  }
  ParticleConfig y = chain.config;
  for (size_t i = 0; i < k; ++i) y.pos[i] += jumps[i];
  for (size_t i = 1; i < k; ++i)
    if (y.pos[i] <= y.pos[i - 1]) fail(Errc::NumericalDegeneracy, "sampled step produced a collision");
  chain.config = y;
  ++chain.step_index;
  return y;
}

namespace {

template <class T>
T basis_value(PolyBasis basis, size_t c, T y, T center, T x_min) {
  T v(1);
  for (size_t m = 0; m < c; ++m) v *= basis == PolyBasis::Monomial ? (y - center) : (y - x_min - T(m));
  return v;
}

// log|det| and sign by LU with partial pivoting.
std::pair<long double, int> log_det(std::vector<long double> a, size_t k) {
  long double ld = 0;
  int sign = 1;
  for (size_t c = 0; c < k; ++c) {
    size_t p = c;
    for (size_t r = c + 1; r < k; ++r)
      if (std::fabs(a[r * k + c]) > std::fabs(a[p * k + c])) p = r;
    if (a[p * k + c] == 0) return {-std::numeric_limits<long double>::infinity(), 0};
    if (p != c) {
      for (size_t j = 0; j < k; ++j) std::swap(a[p * k + j], a[c * k + j]);
      sign = -sign;
    }
    const long double d = a[c * k + c];
    if (d < 0) sign = -sign;
    ld += std::log(std::fabs(d));
    for (size_t r = c + 1; r < k; ++r) {
      const long double f = a[r * k + c] / d;
      if (f == 0) continue;
      for (size_t j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
    }
  }
  return {ld, sign};
}

}  // namespace

double conditional_jump_probability(const ParticleConfig& x, double beta, const std::vector<int>& prefix,
                                    PolyBasis basis) {
  check_beta(beta);
  const size_t k = x.size();
  if (prefix.size() >= k) fail(Errc::InvalidArgument, "prefix must leave at least one free branch");
  const long double q = static_cast<long double>(beta) / (1.0L - beta);
  const long double x_min = static_cast<long double>(x.pos.front());
  const long double center = static_cast<long double>(x.pos[k / 2]);
  // Rows: fixed entries contribute q^e p(x_i + e); free entries p(x_i) + q p(x_i + 1).
  auto build = [&](const std::vector<int>& fixed) {
    std::vector<long double> a(k * k);
    for (size_t i = 0; i < k; ++i) {
      const long double xi = static_cast<long double>(x.pos[i]);
      long double scale = 0;
      for (size_t c = 0; c < k; ++c) {
        const long double p0 = basis_value<long double>(basis, c, xi, center, x_min);
        const long double p1 = basis_value<long double>(basis, c, xi + 1, center, x_min);
        long double v;
        if (i < fixed.size()) v = fixed[i] ? q * p1 : p0;
        else v = p0 + q * p1;
        a[i * k + c] = v;
        scale = std::max(scale, std::max(std::fabs(p0), std::fabs(p1)));
      }
      // Equilibrate using a factor that depends on x_i only, so numerator and
      // denominator are scaled identically.
      for (size_t c = 0; c < k; ++c) a[i * k + c] /= scale;
    }
    return a;
  };
  std::vector<int> num_prefix = prefix;
  num_prefix.push_back(1);
  const auto [ln, sn] = log_det(build(num_prefix), k);
  const auto [ld, sd] = log_det(build(prefix), k);
  if (sd == 0) fail(Errc::InvalidArgument, "prefix has probability zero");
  if (sn == 0) return 0.0;
  return static_cast<double>(sn * sd) * std::exp(static_cast<double>(ln - ld));
}

std::vector<ParticleConfig> simulate(const ParticleConfig& initial, double beta, int64_t T, uint64_t seed) {
  if (T < 0) fail(Errc::InvalidArgument, "number of steps must be non-negative");
  NbrwChain chain = make_chain(initial, beta, seed);
  std::vector<ParticleConfig> traj;
  traj.reserve(static_cast<size_t>(T) + 1);
  traj.push_back(chain.config);
  for (int64_t s = 0; s < T; ++s) traj.push_back(step_exact(chain));
  return traj;
}

std::vector<double> quantiles(const DensityProfile& rho, int64_t n, int64_t M, int64_t N) {
  if (n <= 0 || M < 0 || N < 0) fail(Errc::InvalidArgument, "quantiles need n > 0 and M, N >= 0");
  std::vector<double> g;
  g.reserve(static_cast<size_t>(M + N + 1));
  for (int64_t i = -M; i <= N; ++i) g.push_back(quantile_position(rho, n, i));
  return g;
}

ParticleConfig quantile_initial(const DensityProfile& rho, int64_t n, int64_t M, int64_t N) {
  const std::vector<double> g = quantiles(rho, n, M, N);
  ParticleConfig c;
  c.M = M;
  c.N = N;
  c.pos.resize(g.size());
  for (size_t k = 0; k < g.size(); ++k) {
    // Guard against representation error just below a half-integer.
    const double v = static_cast<double>(n) * g[k];
    c.pos[k] = static_cast<int64_t>(std::llround(std::nearbyint(v * 1e9) / 1e9));
    if (k > 0 && c.pos[k] <= c.pos[k - 1]) c.pos[k] = c.pos[k - 1] + 1;
  }
  return c;
}

void validate_frame(const PearceyFrame& f) {
  if (f.n <= 0) fail(Errc::InvalidArgument, "frame scale n must be positive");
  if (!(f.A > 0)) fail(Errc::InvalidArgument, "frame needs A > 0");
  if (!(f.B > 0 && f.B < 1)) fail(Errc::InvalidArgument, "frame needs B in (0,1)");
  if (!(f.t_c > 0)) fail(Errc::InvalidArgument, "frame needs t_c > 0");
}

int64_t pearcey_time(const PearceyFrame& f, double tau) {
  validate_frame(f);
  const double n = static_cast<double>(f.n);
  return static_cast<int64_t>(std::floor(n * f.t_c - 2.0 * std::sqrt(f.A) * f.B * (1 - f.B) * std::sqrt(n) * tau));
}

namespace {

const ParticleConfig& at_time(const std::vector<ParticleConfig>& traj, int64_t t) {
  if (t < 0 || t >= static_cast<int64_t>(traj.size()))
    fail(Errc::HorizonExceeded, "lattice time " + std::to_string(t) + " outside trajectory horizon [0, " +
                                    std::to_string(static_cast<int64_t>(traj.size()) - 1) + "]");
  return traj[static_cast<size_t>(t)];
}

}  // namespace

std::vector<std::vector<double>> rescale_pearcey(const std::vector<ParticleConfig>& trajectory,
                                                 const PearceyFrame& frame, const std::vector<double>& taus) {
  validate_frame(frame);
  const double n = static_cast<double>(frame.n);
  const double a4 = std::pow(frame.A, 0.25);
  const double den = std::sqrt(2.0) * a4 * frame.B * (1 - frame.B) * std::pow(n, 0.25);
  std::vector<std::vector<double>> out;
  for (double tau : taus) {
    const ParticleConfig& c = at_time(trajectory, pearcey_time(frame, tau));
    const double shift = std::sqrt(2.0) * a4 * frame.B * std::pow(n, 0.25) * tau;
    std::vector<double> v;
    v.reserve(c.size());
    for (int64_t p : c.pos) v.push_back((static_cast<double>(p) - n * frame.x_c) / den + shift);
    out.push_back(std::move(v));
  }
  return out;
}

int64_t tiling_time(double r, double q, double t_c, int64_t n, double t) {
  if (!(r > 1 && q > 0)) fail(Errc::InvalidArgument, "curvature parameters need r > 1, q > 0");
  const double nn = static_cast<double>(n);
  return static_cast<int64_t>(std::floor(nn * t_c - std::sqrt(r - 1) * std::sqrt(nn) * t / (r * q)));
}

std::vector<std::vector<double>> rescale_tiling(const std::vector<ParticleConfig>& trajectory, double r, double q,
                                                double x_c, double t_c, int64_t n, const std::vector<double>& times) {
  const double nn = static_cast<double>(n);
  const double den = std::pow(r - 1, 0.75) * std::pow(nn, 0.25) / std::sqrt(q * r * r * r);
  std::vector<std::vector<double>> out;
  for (double t : times) {
    const ParticleConfig& c = at_time(trajectory, tiling_time(r, q, t_c, n, t));
    const double shift = std::sqrt(r - 1) * std::sqrt(nn) * t / (r * r * q);
    std::vector<double> v;
    v.reserve(c.size());
    for (int64_t p : c.pos) v.push_back((static_cast<double>(p) - nn * x_c + shift) / den);
    out.push_back(std::move(v));
  }
  return out;
}

int64_t default_horizon(double t_c, int64_t n) {
  return static_cast<int64_t>(std::ceil(1.2 * static_cast<double>(n) * t_c));
}

void write_trajectory_csv(std::ostream& os, const std::vector<ParticleConfig>& trajectory) {
  os << "step,label,position\n";
  for (size_t s = 0; s < trajectory.size(); ++s) {
    const auto& c = trajectory[s];
    for (size_t k = 0; k < c.size(); ++k)
      os << s << "," << static_cast<int64_t>(k) - c.M << "," << c.pos[k] << "\n";
  }
}

}  // namespace pk
