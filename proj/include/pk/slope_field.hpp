#pragma once
// Stieltjes transforms of piecewise-constant densities, the complex slope
// f_0 = (beta/(1-beta)) e^{m_0}, its characteristic (complex Burgers) flow,
// density recovery and quantile trajectories.

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "pk/density.hpp"

namespace pk {

using cplx = std::complex<double>;

// d^order/dz^order of m(z) = int rho(x) / (z - x) dx, order 0..4, in closed
// form. Real z on the closed support throws OnSupport for order >= 1; for
// order 0 the limit from the upper half-plane is returned off the piece
// endpoints.
cplx stieltjes(const DensityProfile& rho, cplx z, int order);

class SlopeField {
 public:
  SlopeField(DensityProfile rho, double beta);

  const DensityProfile& density() const { return rho_; }
  double beta() const { return beta_; }
  double q() const { return beta_ / (1 - beta_); }

  cplx f(cplx z) const;  // f_0
  cplx w(cplx z) const;  // f_0 / (f_0 + 1)
  // f_0 and its first three derivatives.
  std::array<cplx, 4> f_derivs(cplx z) const;
  // m_0 and its first three derivatives.
  std::array<cplx, 4> m_derivs(cplx z) const;

 private:
  DensityProfile rho_;
  double beta_;
};

struct FlowValue {
  cplx f;  // f_t(xi)
  cplx w;  // w_t(xi)
  cplx u;  // characteristic foot: xi = u + t w_0(u)
};

// Solves xi = u + t w_0(u) for u in the upper half-plane (Im xi > 0) by
// damped Newton from a 64-point seed grid. `hint` is tried first if given.
// Throws NoCharacteristic (no root, or two distinct roots) or
// NewtonDivergence.
FlowValue evolve(const SlopeField& field, double t, cplx xi, std::optional<cplx> hint = std::nullopt);

// arg* in [-pi, 0]: positive principal arguments are folded to 0 or -pi.
double arg_star(cplx v);

// rho_t(x) = -arg* f_t(x + i0) / pi, taken at the characteristic foot of x
// itself (non-real in the liquid region, real in frozen and void regions);
// Richardson extrapolation over eta in {1e-4, 1e-5, 1e-6} is the fallback.
// Clamped to [0,1]. `flagged` is set at jump
// points of rho_0 when t = 0.
double density_at(const SlopeField& field, double t, double x, bool* flagged = nullptr);

// Support of rho_t is contained in [lo, hi + t].
std::pair<double, double> support_bound(const SlopeField& field, double t);
// int rho_t by adaptive Gauss-Kronrod.
double evolved_mass(const SlopeField& field, double t, double tol = 1e-9);

// gamma_i(t) for the given labels (scale 1/n) on an increasing time grid
// starting at 0, by dopri5 on gamma' = arg*(f_t + 1)/arg*(f_t). Rows are
// per-label. Throws StiffNearEdge when the velocity is undefined.
std::vector<std::vector<double>> quantile_trajectories(const SlopeField& field, int64_t n,
                                                       const std::vector<int64_t>& labels,
                                                       const std::vector<double>& t_grid);
// Direct inversion: x with int_{-inf}^x rho_t = int_{-inf}^{gamma} rho_0.
double quantile_by_inversion(const SlopeField& field, double t, double mass_level);

}  // namespace pk
