#include "pk/slope_field.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "pk/error.hpp"

namespace pk {

namespace {

constexpr double kPi = 3.14159265358979323846;

double factorial(int k) {
  double f = 1;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

}  // namespace

cplx stieltjes(const DensityProfile& rho, cplx z, int order) {
  if (order < 0 || order > 4) fail(Errc::InvalidArgument, "Stieltjes order must be 0..4");
  const bool real = z.imag() == 0.0;
  cplx m = 0.0;
  for (const auto& p : rho.pieces()) {
    if (real && z.real() >= p.a && z.real() <= p.b) {
      const double x = z.real();
      if (order >= 1 || x == p.a || x == p.b)
        fail(Errc::OnSupport, "real evaluation point lies on the support");
      // Boundary value from the upper half-plane.
      m += p.rho * cplx(std::log(x - p.a) - std::log(p.b - x), -kPi);
      continue;
    }
    if (order == 0) {
      if (real)
        m += p.rho * (std::log(std::abs(z.real() - p.a)) - std::log(std::abs(z.real() - p.b)));
      else
        m += p.rho * (std::log(z - p.a) - std::log(z - p.b));
    } else {
      const double c = (order % 2 == 1 ? 1.0 : -1.0) * factorial(order - 1);
      m += p.rho * c * (std::pow(z - p.a, -order) - std::pow(z - p.b, -order));
    }
  }
  return m;
}

SlopeField::SlopeField(DensityProfile rho, double beta) : rho_(std::move(rho)), beta_(beta) {
  if (!(beta > 0 && beta < 1)) fail(Errc::InvalidArgument, "beta must lie in (0,1)");
}

std::array<cplx, 4> SlopeField::m_derivs(cplx z) const {
  return {stieltjes(rho_, z, 0), stieltjes(rho_, z, 1), stieltjes(rho_, z, 2), stieltjes(rho_, z, 3)};
}

cplx SlopeField::f(cplx z) const { return q() * std::exp(stieltjes(rho_, z, 0)); }

cplx SlopeField::w(cplx z) const {
  const cplx fz = f(z);
  return fz / (fz + 1.0);
}

std::array<cplx, 4> SlopeField::f_derivs(cplx z) const {
  const auto m = m_derivs(z);
  const cplx f0 = q() * std::exp(m[0]);
  return {f0, f0 * m[1], f0 * (m[2] + m[1] * m[1]), f0 * (m[3] + 3.0 * m[1] * m[2] + m[1] * m[1] * m[1])};
}

namespace {

struct NewtonResult {
  bool converged = false;
  cplx u;
  double residual = 0;
};

// F(u) = u + t w0(u) - xi, F'(u) = 1 + t f0'/(f0+1)^2.
NewtonResult newton(const SlopeField& field, double t, cplx xi, cplx u) {
  const double scale = 1.0 + std::abs(xi);
  auto F = [&](cplx v, cplx* dF) {
    const cplx m0 = stieltjes(field.density(), v, 0);
    const cplx f0 = field.q() * std::exp(m0);
    const cplx g = f0 + 1.0;
    if (dF) *dF = 1.0 + t * f0 * stieltjes(field.density(), v, 1) / (g * g);
    return v + t * f0 / g - xi;
  };
  NewtonResult r;
  cplx d;
  cplx Fu = F(u, &d);
  for (int it = 0; it < 80; ++it) {
    if (std::abs(Fu) < 1e-14 * scale) {
      r.converged = true;
      break;
    }
    const cplx step = -Fu / d;
    double lam = 1.0;
    bool moved = false;
    for (int h = 0; h < 40; ++h, lam *= 0.5) {
      const cplx v = u + lam * step;
      if (v.imag() <= 0) continue;
      cplx dv;
      const cplx Fv = F(v, &dv);
      if (std::abs(Fv) < std::abs(Fu) || std::abs(Fv) < 1e-14 * scale) {
        u = v;
        Fu = Fv;
        d = dv;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    if (std::abs(lam * step) < 1e-16 * (1 + std::abs(u))) {
      r.converged = std::abs(Fu) < 1e-11 * scale;
      break;
    }
  }
  r.u = u;
  r.residual = std::abs(Fu) / scale;
  if (!r.converged) r.converged = r.residual < 1e-12;
  return r;
}

}  // namespace

FlowValue evolve(const SlopeField& field, double t, cplx xi, std::optional<cplx> hint) {
  if (t < 0) fail(Errc::InvalidArgument, "time must be non-negative");
  if (t == 0) {
    const cplx f0 = field.f(xi);
    return {f0, f0 / (f0 + 1.0), xi};
  }
  if (!(xi.imag() > 0)) fail(Errc::NoCharacteristic, "characteristics reach only the upper half-plane");
  auto finish = [&](cplx u) {
    const cplx f0 = field.f(u);
    return FlowValue{f0, f0 / (f0 + 1.0), u};
  };
  if (hint && hint->imag() > 0) {
    const NewtonResult r = newton(field, t, xi, *hint);
    if (r.converged) return finish(r.u);
  }
  // Seeds u = xi - t w over a grid of plausible w (lower half-plane).
  struct Seed {
    cplx u;
    double res;
  };
  std::vector<Seed> seeds;
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const cplx wv(-1.0 + 3.0 * a / 7.0, -std::pow(10.0, -3.0 + 3.5 * b / 7.0));
      const cplx u = xi - t * wv;
      const cplx res = u + t * field.w(u) - xi;
      seeds.push_back({u, std::abs(res)});
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& p, const Seed& q) { return p.res < q.res; });
  std::vector<NewtonResult> roots;
  for (size_t s = 0; s < 16; ++s) {
    const NewtonResult r = newton(field, t, xi, seeds[s].u);
    if (r.converged) roots.push_back(r);
  }
  if (roots.empty()) fail(Errc::NewtonDivergence, "Newton failed from every seed");
  std::sort(roots.begin(), roots.end(), [](const auto& p, const auto& q) { return p.residual < q.residual; });
  const cplx best = roots.front().u;
  for (const auto& r : roots)
    if (std::abs(r.u - best) > 1e-6 * (1 + std::abs(best)))
      fail(Errc::NoCharacteristic, "characteristic pre-image is not unique");
  return finish(best);
}

double arg_star(cplx v) {
  double a = std::arg(v);
  if (a > 0) a = a > kPi / 2 ? -kPi : 0.0;
  return a;
}

namespace {

constexpr double kEta[3] = {1e-4, 1e-5, 1e-6};

// Limit of f_t(x + i eta) as eta -> 0 by quadratic Richardson in eta.
cplx boundary_slope(const SlopeField& field, double t, double x) {
  cplx v[3];
  std::optional<cplx> hint;
  for (int k = 0; k < 3; ++k) {
    const FlowValue fv = evolve(field, t, cplx(x, kEta[k]), hint);
    v[k] = fv.f;
    hint = fv.u;
  }
  cplx out = 0.0;
  for (int k = 0; k < 3; ++k) {
    double wk = 1;
    for (int j = 0; j < 3; ++j)
      if (j != k) wk *= kEta[j] / (kEta[j] - kEta[k]);
    out += wk * v[k];
  }
  return out;
}

double density_from_args(const SlopeField& field, double t, double x) {
  // Liquid points: the pre-image of x itself is non-real, so solve on the
  // axis directly. Richardson in eta is only used for frozen and gap points,
  // where it is exact away from the edges.
  if (t > 0) {
    const FlowValue near = evolve(field, t, cplx(x, kEta[2]));
    const NewtonResult r = newton(field, t, cplx(x, 0), near.u);
    if (r.converged && r.u.imag() > 1e-12 * (1 + std::abs(r.u)))
      return std::clamp(-arg_star(field.f(r.u)) / kPi, 0.0, 1.0);
    // Frozen or void: the pre-image is real and the density is the boundary
    // value there. This keeps the jumps at the support ends sharp.
    try {
      const FlowValue tiny = evolve(field, t, cplx(x, 1e-11), near.u);
      if (tiny.u.imag() < 1e-8) return std::clamp(-arg_star(field.f(cplx(tiny.u.real(), 0))) / kPi, 0.0, 1.0);
    } catch (const Error&) {
    }
  }
  double a[3];
  std::optional<cplx> hint;
  for (int k = 0; k < 3; ++k) {
    const FlowValue fv = evolve(field, t, cplx(x, kEta[k]), hint);
    a[k] = -arg_star(fv.f) / kPi;
    hint = fv.u;
  }
  double out = 0;
  for (int k = 0; k < 3; ++k) {
    double wk = 1;
    for (int j = 0; j < 3; ++j)
      if (j != k) wk *= kEta[j] / (kEta[j] - kEta[k]);
    out += wk * a[k];
  }
  return std::clamp(out, 0.0, 1.0);
}

}  // namespace

double density_at(const SlopeField& field, double t, double x, bool* flagged) {
  if (t < 0) fail(Errc::InvalidArgument, "time must be non-negative");
  if (flagged) {
    *flagged = false;
    if (t == 0)
      for (const auto& p : field.density().pieces())
        if (x == p.a || x == p.b) *flagged = true;
  }
  return density_from_args(field, t, x);
}

std::pair<double, double> support_bound(const SlopeField& field, double t) {
  return {field.density().support_lo(), field.density().support_hi() + t};
}

double evolved_mass(const SlopeField& field, double t, double tol) {
  const auto [lo, hi] = support_bound(field, t);
  auto f = [&](double x) { return density_at(field, t, x); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, tol);
}

double quantile_by_inversion(const SlopeField& field, double t, double level) {
  const auto [lo, hi] = support_bound(field, t);
  auto mass_to = [&](double x) {
    if (x <= lo) return 0.0;
    auto f = [&](double y) { return density_at(field, t, y); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, x, 20, 1e-10);
  };
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t iters = 100;
  auto g = [&](double x) { return mass_to(x) - level; };
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi), tol, iters);
  return 0.5 * (r.first + r.second);
}

std::vector<std::vector<double>> quantile_trajectories(const SlopeField& field, int64_t n,
                                                       const std::vector<int64_t>& labels,
                                                       const std::vector<double>& t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0) fail(Errc::InvalidArgument, "time grid must start at 0");
  for (size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) fail(Errc::InvalidArgument, "time grid must be increasing");
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 1>;
  std::vector<std::vector<double>> out;
  for (int64_t label : labels) {
    const double g0 = quantile_position(field.density(), n, label);
    auto rhs = [&](const State& s, State& ds, double t) {
      if (t <= 0) t = 0;
      const cplx f = t == 0 ? field.f(cplx(s[0], 1e-300)) : boundary_slope(field, t, s[0]);
      const double den = arg_star(f);
      if (std::abs(den) < 1e-10) fail(Errc::StiffNearEdge, "quantile sits on an edge (zero density)");
      ds[0] = arg_star(f + 1.0) / den;
    };
    State s{g0};
    std::vector<double> row{g0};
    auto stepper = ode::make_controlled(1e-10, 1e-10, ode::runge_kutta_dopri5<State>());
    for (size_t k = 1; k < t_grid.size(); ++k) {
      double tcur = t_grid[k - 1];
      double dt = std::min(1e-3, t_grid[k] - tcur);
      int guard = 0;
      while (tcur < t_grid[k]) {
        if (tcur + dt > t_grid[k]) dt = t_grid[k] - tcur;
        const auto res = stepper.try_step(rhs, s, tcur, dt);
        if (res == ode::fail) {
          if (dt < 1e-12) fail(Errc::StiffNearEdge, "integrator step underflow near an arctic edge");
        }
        if (++guard > 1000000) fail(Errc::StiffNearEdge, "integrator made no progress");
      }
      row.push_back(s[0]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace pk
