#pragma once
// Determinantal kernels: the NBRW kernel K^Bernoulli (exact residue sum in w
// plus vertical-line quadrature in z, or a closed-loop double contour for large
// systems), the extended Pearcey kernel, the rescaled comparison, the
// brute-force correlation oracle, Fredholm gap probabilities and the discrete
// key functions D1/D2.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pk/cusp.hpp"
#include "pk/lattice.hpp"

namespace pk {

struct SpaceTimePoint {
  int64_t t = 1;  // >= 1
  int64_t x = 0;
  bool operator==(const SpaceTimePoint&) const = default;
};

struct KernelValue {
  std::complex<double> value;
  double abs_error_estimate = 0;  // |value(h) - value(h/2)|
  int pole_count = 0;
  int64_t nodes = 0;              // quadrature nodes of the final pass
  double peak_log = 0;            // largest log-magnitude met (finite)
  bool empty_pole_set = false;    // kernel reduced to the binomial term
  std::string method;
};

// ----- K^Bernoulli --------------------------------------------------------

enum class BernoulliMethod { Auto, Residue, Loop };

struct BernoulliOptions {
  BernoulliMethod method = BernoulliMethod::Auto;
  // Real part of the z line; must be a half-integer reachable from
  // x2 - t2 + 1/2 without crossing a pole of the z-integrand.
  std::optional<double> z_line;
  double rel_tol = 1e-10;
};

// 1{x1>=x2} 1{t1>t2} (-1)^{x1-x2+1} C(t1-t2, x1-x2)
//   + t1!/(t2-1)! (2 pi i)^{-2} int dz oint dw (z-x2+1)_{t2-1}/(w-x1)_{t1+1}
//     * 1/(w-z) * sin(pi w)/sin(pi z) * ((1-b)/b)^{w-z} * prod (z-d_i)/(w-d_i).
// Throws InvalidArgument, QuadratureNonConvergence.
KernelValue kernel_bernoulli(const SpaceTimePoint& p1, const SpaceTimePoint& p2, const ParticleConfig& d,
                             double beta, const BernoulliOptions& opt = {});

// The binomial (first) term alone, exact in log domain.
double bernoulli_binomial_term(const SpaceTimePoint& p1, const SpaceTimePoint& p2);

// det[K(p_a; p_b)].
double correlation_determinant(const std::vector<SpaceTimePoint>& pts, const ParticleConfig& d, double beta);

// Probability that every point is occupied, by weighted enumeration of all
// trajectories up to time T. Throws TooLarge past 10^7 enumerated branches.
double brute_force_correlations(const ParticleConfig& d, double beta, int64_t T,
                                const std::vector<SpaceTimePoint>& points);

// ----- Pearcey ------------------------------------------------------------

struct PearceyOptions {
  double vertex_shift = 0.5;  // w-ray vertices at +-delta
  double panel = 0.25;        // panel length (arclength)
  int order = 16;             // Gauss-Legendre points per panel
  double drop_nats = 40;      // truncation depth
};

// K^Pearcey(s, x; t, y), with error estimate from one step halving.
KernelValue kernel_pearcey(double s, double x, double t, double y, const PearceyOptions& opt = {});
// -1[s<t] exp(-(x-y)^2 / (2(t-s))) / sqrt(2 pi (t-s)).
double pearcey_gaussian_term(double s, double x, double t, double y);
// Single pass at the given resolution (no refinement estimate).
std::complex<double> kernel_pearcey_single(double s, double x, double t, double y, const PearceyOptions& opt);
// Matrix K(s, xs[a]; t, ys[b]) from one shared set of contour nodes.
Eigen::MatrixXd pearcey_matrix(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                               const PearceyOptions& opt = {});

// ----- Rescaled comparison -------------------------------------------------

struct RescaledPair {
  KernelValue lhs, rhs;
  SpaceTimePoint p1, p2;
  double tau1 = 0, gamma1 = 0, tau2 = 0, gamma2 = 0;  // effective (after rounding)
  double pearcey_s = 0, pearcey_x = 0, pearcey_t = 0, pearcey_y = 0;
};

// lhs = (-1)^{x1-x2} B^{x1-x2} (1-B)^{t1-t2+x2-x1} K^Bernoulli(t1,x1;t2,x2),
// rhs = (sqrt2 n^{1/4} A^{1/4} B(1-B))^{-1} K^Pearcey(-tau1/(2 A^{1/2} B(1-B)),
//        gamma1/(sqrt2 A^{1/4} B(1-B)); same for 2), with d = quantile_initial(rho, n)
// and t_i = n t_c + n^{1/2} tau_i, x_i = n x_c + B n^{1/2} tau_i + n^{1/4} gamma_i rounded.
RescaledPair rescaled_kernel_pair(double tau1, double gamma1, double tau2, double gamma2, int64_t n,
                                  const SlopeField& field, const CuspData& cusp);
// Same, reusing a precomputed initial configuration.
RescaledPair rescaled_kernel_pair(double tau1, double gamma1, double tau2, double gamma2, int64_t n,
                                  const ParticleConfig& d, const CuspData& cusp);

// Exact log prefactor log(B^{dx}(1-B)^{dt-dx} t1!/(t2-1)!) + n D2(z) - n D1(z)
// at z = (round(n z_c) + 1/2)/n, and the asymptote (dt+1) log n - log(t_c B(1-B)).
struct PrefactorCheck {
  double exact = 0, asymptotic = 0;
};
PrefactorCheck prefactor_check(const SpaceTimePoint& p1, const SpaceTimePoint& p2, int64_t n, const CuspData& cusp);

struct BinomialGaussian {
  double exact = 0, gaussian = 0;
};
// exact = B^{dx}(1-B)^{dt-dx} C(dt, dx); gaussian = the local-limit density
// (2 pi B(1-B) dt)^{-1/2} exp(-(dx - B dt)^2 / (2 B(1-B) dt)). Throws OutOfSupport.
BinomialGaussian binomial_gaussian_check(int64_t t1, int64_t x1, int64_t t2, int64_t x2, double B);

// ----- Fredholm -------------------------------------------------------------

// K(s, xs[a]; t, ys[b]).
using KernelBlockFn =
    std::function<Eigen::MatrixXd(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys)>;

KernelBlockFn pearcey_block_kernel(const PearceyOptions& opt = {});

struct FredholmResult {
  double value = 1;
  double change = 0;  // |det(m) - det(m/2)| at acceptance
  int order = 0;      // final nodes per block
};

// det(I - chi K) over blocks (times[k], intervals[k]) by Gauss-Legendre
// Nystrom, doubling m until the change is below tol. Throws NotConverged.
FredholmResult fredholm_gap(const std::vector<double>& times, const std::vector<std::pair<double, double>>& intervals,
                            const KernelBlockFn& kernel, int m = 16, double tol = 1e-5, int max_order = 512);
// One determinant at fixed order.
double fredholm_det(const std::vector<double>& times, const std::vector<std::pair<double, double>>& intervals,
                    const KernelBlockFn& kernel, int m);

// ----- Key functions ---------------------------------------------------------

enum class KeyWhich { D1, D2 };

struct KeyParams {
  int64_t t1 = 1, x1 = 0, t2 = 1, x2 = 0;
  ParticleConfig d;
  double beta = 0.5;
  int64_t n = 1;
};

// D_i(z) normalized so that Im D_i = 0 on (d_{-1}/n, d_0/n); lower half-plane
// by Schwarz reflection. Throws OnPole on E(D_i).
std::complex<double> key_function_D(std::complex<double> z, KeyWhich which, const KeyParams& p);
std::complex<double> key_function_D_prime(std::complex<double> z, KeyWhich which, const KeyParams& p);
// Zeros minus poles of D_i' inside |z - center| = radius (radius snapped so
// the circle meets the real axis at half-integers / n).
int critical_point_winding(KeyWhich which, const KeyParams& p, double center, double radius);

// max |D_i(z) - D_i(z_c) + t_c^{-4} A (z - z_c)^4| over a disc grid of radius
// n^{-1/4+eps} t_c, and the fitted C = max / n^{-1+2 eps}.
struct QuarticCheck {
  double max_residual = 0, C = 0, radius = 0;
};
QuarticCheck key_quartic_check(KeyWhich which, const KeyParams& p, const CuspData& cusp, double eps = 0.05);

}  // namespace pk
