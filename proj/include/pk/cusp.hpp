#pragma once
// Cusp location (x_c, t_c, z_c) of the evolving density, Pearcey scaling
// parameters (A, B), drift matching, the curvature-parameter bijection and
// the continuous key function G.

#include <complex>
#include <string>
#include <vector>

#include "pk/slope_field.hpp"

namespace pk {

struct CuspData {
  double x_c = 0, t_c = 0, z_c = 0;
  double A = 0, B = 0;  // filled by scaling_params (or solve_cusp_full)
  double beta = 0.5;
  std::vector<std::string> warnings;  // e.g. "MultiRoot"
  // Residuals of the three defining equations at the returned point.
  double residual_g = 0, residual_t = 0, residual_x = 0;
};

// g(z) = (m'' + m'^2)(f + 1) - 2 f m'^2, a multiple of f'' - 2 f'^2/(f+1).
double cusp_function(const SlopeField& field, double z);

// Root of g on (E_- + d, E_+ - d), d = 1e-9 (E_+ - E_-), by Brent; then
// t_c = -(f+1)^2 / (f m'), x_c = z_c + t_c f/(f+1). Throws NoSignChange.
CuspData solve_cusp(const SlopeField& field);

// A = t_c^4 int rho/(4(z_c-x)^4) - t_c^4/(12(t_c+z_c-x_c)^3) - t_c^4/(12(x_c-z_c)^3),
// B = (x_c - z_c)/t_c. Throws NonPositiveA.
void scaling_params(const SlopeField& field, CuspData& cusp);
CuspData solve_cusp_full(const SlopeField& field);

// beta/(1-beta) = f* / e^{m(z_c)}.
double match_drift(double target_slope, const DensityProfile& rho, double z_c);

struct CurvatureParams {
  double r = 2;  // > 1
  double q = 1;  // > 0
};
struct PearceyScales {
  double A = 1, B = 0.5;
};
// B = 1/r, A = r^2 / (4 (r-1) q^2). Throws OutOfRange.
PearceyScales curvature_map(const CurvatureParams& p);
CurvatureParams curvature_inverse(const PearceyScales& s);

// G(z) = int_{<E_-} log(z-x) rho + int_{>E_+} log(x-z) rho
//        + (z - x_c + t_c) log(z - x_c + t_c) - (z - x_c) log(x_c - z) + z log(beta/(1-beta)),
// and its derivatives (order 0..4). Real z outside (E_-, E_+) throws
// OnBranchCut.
std::complex<double> key_function_G(const SlopeField& field, const CuspData& cusp, std::complex<double> z, int order);

// Fit of |G(z) - G(z_c) + t_c^{-4} A (z-z_c)^4| <= C |z-z_c|^5 t_c^{-11/2} over
// a disc grid of radius 0.05 t_c^{3/2}; returns the smallest such C.
double quartic_model_constant(const SlopeField& field, const CuspData& cusp);

}  // namespace pk
