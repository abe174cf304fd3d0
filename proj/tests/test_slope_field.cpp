// Stieltjes transform, complex slope, characteristic flow, densities and
// quantile trajectories.

#include <doctest.h>

#include <cmath>
#include <random>

#include "pk/error.hpp"
#include "pk/slope_field.hpp"

using namespace pk;

namespace {

DensityProfile random_density(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const double a = -1 - u(rng), b = -u(rng) * 0.5, c = u(rng) * 0.5, d = 1 + u(rng);
  return DensityProfile({{a, b, u(rng)}, {c, d, u(rng)}});
}

}  // namespace

TEST_CASE("Stieltjes transform closed forms") {
  const DensityProfile unit({{0.0, 1.0, 1.0}});
  CHECK(std::abs(stieltjes(unit, cplx(2, 0), 0) - std::log(2.0)) < 1e-14);
  const auto sym = symmetric_two_block();
  CHECK(std::abs(stieltjes(sym, 0.0, 0)) < 1e-14);
  CHECK(std::abs(stieltjes(sym, 0.0, 1) - cplx(-4, 0)) < 1e-13);
  CHECK(std::abs(stieltjes(sym, 0.0, 2)) < 1e-13);
  CHECK_THROWS_AS(stieltjes(sym, 0.5, 1), Error);
  // Upper half-plane values have negative imaginary part.
  for (double x = -1.5; x <= 1.5; x += 0.1)
    for (double y : {1e-3, 0.1, 1.0}) CHECK(stieltjes(sym, cplx(x, y), 0).imag() < 0);
}

TEST_CASE("Stieltjes derivatives agree with finite differences") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2), v(0.2, 1.5);
  for (int k = 0; k < 100; ++k) {
    const auto rho = random_density(rng);
    const cplx z(u(rng), v(rng));
    const double h = 1e-3;
    for (int order = 0; order < 4; ++order) {
      auto m = [&](double s) { return stieltjes(rho, z + s, order); };
      const cplx fd = (m(-2 * h) - 8.0 * m(-h) + 8.0 * m(h) - m(2 * h)) / (12 * h);
      const cplx ex = stieltjes(rho, z, order + 1);
      CHECK(std::abs(fd - ex) < 1e-6 * (1 + std::abs(ex)));
    }
  }
}

TEST_CASE("complex slope") {
  const SlopeField half(symmetric_two_block(), 0.5);
  CHECK(std::abs(half.f(0.0) - 1.0) < 1e-14);
  CHECK(std::abs(half.w(0.0) - 0.5) < 1e-14);
  const SlopeField other(symmetric_two_block(), 0.2);
  for (double x : {-0.3, 0.0, 0.25}) CHECK(std::abs(other.f(x) / half.f(x) - 0.25) < 1e-13);
  for (double x = -0.3; x <= 0.3; x += 0.05) CHECK(half.f(cplx(x, 1e-3)).imag() < 0);
  const auto fd = half.f_derivs(cplx(0.1, 0.2));
  const double h = 1e-5;
  const cplx num = (half.f(cplx(0.1 + h, 0.2)) - half.f(cplx(0.1 - h, 0.2))) / (2 * h);
  CHECK(std::abs(num - fd[1]) < 1e-8);
}

TEST_CASE("characteristic flow") {
  const SlopeField field(symmetric_two_block(), 0.5);
  const cplx xi(0.2, 0.3);
  CHECK(std::abs(evolve(field, 0, xi).f - field.f(xi)) < 1e-15);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uy(0.3, 1.0), ut(0.05, 0.8), ud(0.01, 0.2);
  for (int k = 0; k < 100; ++k) {
    const double t = ut(rng), s = t + ud(rng);
    const cplx z(ux(rng), uy(rng));
    const FlowValue a = evolve(field, t, z);
    CHECK(std::abs(a.u + t * field.w(a.u) - z) < 1e-10);
    const FlowValue b = evolve(field, s, z + (s - t) * a.w);
    CHECK(std::abs(b.w - a.w) < 1e-8);
  }
  CHECK_THROWS_AS(evolve(field, 0.5, cplx(0.1, -0.1)), Error);
  CHECK_THROWS_AS(evolve(field, -0.1, xi), Error);
}

TEST_CASE("densities at and after time zero") {
  const SlopeField field(symmetric_two_block(), 0.5);
  CHECK(density_at(field, 0, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(density_at(field, 0, 0.0) == doctest::Approx(0.0).epsilon(1e-6));
  bool flagged = false;
  density_at(field, 0, 1.0 / 3.0, &flagged);
  CHECK(flagged);
  for (double x = -1.2; x <= 1.8; x += 0.1) {
    const double r = density_at(field, 0.5, x);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  CHECK(std::abs(evolved_mass(field, 0.5) - 4.0 / 3.0) < 1e-6);
  // Before the cusp time the gap persists at its midpoint (x = t/2).
  CHECK(density_at(field, 0.5, 0.25) < 1e-6);
  CHECK(density_at(field, 1.3, 0.65) > 0.01);
}

TEST_CASE("density near the cusp scales like max((t-t_c)^{1/2}, |x-x_c|^{1/3})") {
  // Symmetric example: t_c = 1, x_c = 1/2 and the centre moves as t/2.
  const SlopeField field(symmetric_two_block(), 0.5);
  const double dt = 1e-4, t = 1 + dt;
  double lo = 1e300, hi = 0;
  for (double ld = -8; ld <= -2; ld += 0.5) {
    const double d = std::pow(10.0, ld);
    const double r = density_at(field, t, t / 2 + d);
    const double scale = std::max(std::sqrt(dt), std::cbrt(d));
    lo = std::min(lo, r / scale);
    hi = std::max(hi, r / scale);
  }
  CHECK(lo > 0);
  CHECK(hi / lo < 9.0);  // one constant c with every ratio in [c/3, 3c]
}

TEST_CASE("quantile trajectories") {
  const SlopeField field(symmetric_two_block(), 0.5);
  const int64_t n = 100;
  const std::vector<int64_t> labels = {-40, -20, 20, 40};
  const std::vector<double> grid = {0, 0.1, 0.25, 0.5};
  const auto traj = quantile_trajectories(field, n, labels, grid);
  for (size_t a = 0; a < labels.size(); ++a) {
    CHECK(traj[a][0] == doctest::Approx(quantile_position(field.density(), n, labels[a])).epsilon(1e-15));
    const double level = field.density().mass_below(traj[a][0]);
    for (size_t k = 1; k < grid.size(); ++k)
      CHECK(std::abs(traj[a][k] - quantile_by_inversion(field, grid[k], level)) < 1e-4);
  }
  // Reflection x -> t - x of the symmetric example pairs labels i and -i.
  for (size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(traj[0][k] + traj[3][k] - grid[k]) < 1e-6);
    CHECK(std::abs(traj[1][k] + traj[2][k] - grid[k]) < 1e-6);
  }
  CHECK_THROWS_AS(quantile_trajectories(field, n, labels, {0.1, 0.2}), Error);
}

TEST_CASE("arg* folding") {
  CHECK(arg_star(cplx(1, -1)) == doctest::Approx(-M_PI / 4));
  CHECK(arg_star(cplx(1, 1e-3)) == 0.0);
  CHECK(arg_star(cplx(-1, 1e-3)) == doctest::Approx(-M_PI));
}
