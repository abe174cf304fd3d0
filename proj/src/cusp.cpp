#include "pk/cusp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "pk/error.hpp"

namespace pk {

namespace {

// z - x_c + t_c and x_c - z.
struct Shifts {
  cplx p, m;
};
Shifts shifts(const CuspData& c, cplx z) { return {z - c.x_c + c.t_c, c.x_c - z}; }

}  // namespace

double cusp_function(const SlopeField& field, double z) {
  const auto m = field.m_derivs(cplx(z, 0.0));
  const double f = field.q() * std::exp(m[0].real());
  const double m1 = m[1].real(), m2 = m[2].real();
  return (m2 + m1 * m1) * (f + 1) - 2 * f * m1 * m1;
}

namespace {

CuspData complete(const SlopeField& field, double z) {
  CuspData c;
  c.beta = field.beta();
  c.z_c = z;
  const auto fd = field.f_derivs(cplx(z, 0.0));
  const double f = fd[0].real(), f1 = fd[1].real(), f2 = fd[2].real();
  c.t_c = -(f + 1) * (f + 1) / f1;
  c.x_c = z + c.t_c * f / (f + 1);
  c.residual_g = std::abs(f2 - 2 * f1 * f1 / (f + 1)) / (std::abs(f2) + 2 * f1 * f1 / std::abs(f + 1) + 1e-300);
  c.residual_t = std::abs(1 + c.t_c * f1 / ((f + 1) * (f + 1)));
  c.residual_x = std::abs(c.x_c - z - c.t_c * f / (f + 1));
  return c;
}

}  // namespace

CuspData solve_cusp(const SlopeField& field) {
  const DensityProfile& rho = field.density();
  const double lo0 = rho.gap_lo(), hi0 = rho.gap_hi();
  const double d = 1e-9 * (hi0 - lo0);
  const double lo = lo0 + d, hi = hi0 - d;
  // Sign scan on a 10^3 grid locates every bracketed root.
  const int grid = 1000;
  std::vector<std::pair<double, double>> brackets;
  double xa = lo, ga = cusp_function(field, lo);
  for (int k = 1; k <= grid; ++k) {
    const double xb = lo + (hi - lo) * k / grid;
    const double gb = cusp_function(field, xb);
    if (ga == 0) brackets.emplace_back(xa, xa);
    else if ((ga < 0) != (gb < 0) && gb != 0) brackets.emplace_back(xa, xb);
    xa = xb;
    ga = gb;
  }
  if (brackets.empty()) fail(Errc::NoSignChange, "g does not change sign on the gap");
  std::vector<CuspData> cands;
  for (auto [a, b] : brackets) {
    double z = a;
    if (a != b) {
      boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
      std::uintmax_t it = 200;
      auto g = [&](double x) { return cusp_function(field, x); };
      const auto r = boost::math::tools::toms748_solve(g, a, b, tol, it);
      z = 0.5 * (r.first + r.second);
    }
    CuspData c = complete(field, z);
    if (c.t_c > 0) cands.push_back(c);
  }
  if (cands.empty()) fail(Errc::NoSignChange, "no root of g yields a positive cusp time");
  size_t best = 0;
  if (cands.size() > 1) {
    double bestv = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < cands.size(); ++k) {
      const double v = std::abs(key_function_G(field, cands[k], cplx(cands[k].z_c, 0), 3));
      if (v < bestv) {
        bestv = v;
        best = k;
      }
    }
  }
  CuspData out = cands[best];
  if (cands.size() > 1) out.warnings.push_back("MultiRoot");
  return out;
}

void scaling_params(const SlopeField& field, CuspData& c) {
  const double m3 = stieltjes(field.density(), cplx(c.z_c, 0), 3).real();
  const double integral = -m3 / 24.0;  // int rho / (4 (z_c - x)^4)
  const double t4 = std::pow(c.t_c, 4);
  const double a = t4 * integral - t4 / (12 * std::pow(c.t_c + c.z_c - c.x_c, 3)) -
                   t4 / (12 * std::pow(c.x_c - c.z_c, 3));
  c.B = (c.x_c - c.z_c) / c.t_c;
  if (!(a > 0)) fail(Errc::NonPositiveA, "scaling parameter A is not positive");
  c.A = a;
}

CuspData solve_cusp_full(const SlopeField& field) {
  CuspData c = solve_cusp(field);
  scaling_params(field, c);
  return c;
}

double match_drift(double target_slope, const DensityProfile& rho, double z_c) {
  if (!(target_slope > 0)) fail(Errc::InvalidArgument, "target slope must be positive");
  const double r = target_slope / std::exp(stieltjes(rho, cplx(z_c, 0), 0).real());
  return r / (1 + r);
}

PearceyScales curvature_map(const CurvatureParams& p) {
  if (!(p.r > 1 && p.q > 0)) fail(Errc::OutOfRange, "curvature parameters need r > 1 and q > 0");
  return {p.r * p.r / (4 * (p.r - 1) * p.q * p.q), 1 / p.r};
}

CurvatureParams curvature_inverse(const PearceyScales& s) {
  if (!(s.A > 0 && s.B > 0 && s.B < 1)) fail(Errc::OutOfRange, "Pearcey scales need A > 0 and B in (0,1)");
  const double r = 1 / s.B;
  return {r, r / (2 * std::sqrt(s.A * (r - 1)))};
}

cplx key_function_G(const SlopeField& field, const CuspData& c, cplx z, int order) {
  const DensityProfile& rho = field.density();
  if (order < 0 || order > 4) fail(Errc::InvalidArgument, "G order must be 0..4");
  if (z.imag() == 0 && (z.real() <= rho.gap_lo() || z.real() >= rho.gap_hi()))
    fail(Errc::OnBranchCut, "z lies on a branch cut of G");
  const Shifts s = shifts(c, z);
  const double lq = std::log(field.q());
  switch (order) {
    case 0: {
      cplx v = 0;
      const double elo = rho.gap_lo();
      for (const auto& p : rho.pieces()) {
        const cplx za = z - p.a, zb = z - p.b;
        auto xl = [](cplx u) { return u == cplx(0) ? cplx(0) : u * std::log(u); };
        if (p.b <= elo) v += p.rho * (xl(za) - xl(zb) - (p.b - p.a));
        else v += p.rho * (xl(-zb) - xl(-za) - (p.b - p.a));
      }
      return v + s.p * std::log(s.p) + (s.m) * std::log(s.m) + z * lq;
    }
    case 1: return stieltjes(rho, z, 0) + std::log(s.p) - std::log(s.m) + lq;
    case 2: return stieltjes(rho, z, 1) + 1.0 / s.p + 1.0 / s.m;
    case 3: return stieltjes(rho, z, 2) - 1.0 / (s.p * s.p) + 1.0 / (s.m * s.m);
    default: return stieltjes(rho, z, 3) + 2.0 / (s.p * s.p * s.p) + 2.0 / (s.m * s.m * s.m);
  }
}

double quartic_model_constant(const SlopeField& field, const CuspData& c) {
  const double R = 0.05 * std::pow(c.t_c, 1.5);
  const cplx zc(c.z_c, 0);
  const cplx g0 = key_function_G(field, c, zc, 0);
  double C = 0;
  for (int a = 1; a <= 10; ++a) {
    const double r = R * a / 10.0;
    for (int b = 0; b < 16; ++b) {
      const cplx dz = std::polar(r, 2 * M_PI * (b + 0.5) / 16.0);
      const cplx resid = key_function_G(field, c, zc + dz, 0) - g0 + c.A / std::pow(c.t_c, 4) * std::pow(dz, 4);
      C = std::max(C, std::abs(resid) / (std::pow(r, 5) * std::pow(c.t_c, -5.5)));
    }
  }
  return C;
}

}  // namespace pk
