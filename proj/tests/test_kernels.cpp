// Kernels: NBRW kernel against enumeration, Pearcey kernel, rescaled
// comparison, Fredholm determinants and the discrete key functions.

#include <doctest.h>

#include <cmath>
#include <random>

#include "pk/error.hpp"
#include "pk/kernels.hpp"
#include "pk/nbrw.hpp"

using namespace pk;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<Errc>(0);
}

struct Symmetric {
  SlopeField field{symmetric_two_block(), 0.5};
  CuspData cusp = solve_cusp_full(field);
};

KeyParams key_params(const Symmetric& s, int64_t n) {
  KeyParams p;
  p.d = quantile_initial(s.field.density(), n, 2 * n / 3, 2 * n / 3);
  p.n = n;
  p.beta = 0.5;
  p.t1 = p.t2 = n;
  p.x1 = p.x2 = n / 2;
  return p;
}

}  // namespace

TEST_CASE("binomial term") {
  CHECK(bernoulli_binomial_term({2, 0}, {2, 0}) == 0.0);  // equal times
  CHECK(bernoulli_binomial_term({1, 0}, {3, 0}) == 0.0);  // t1 < t2
  CHECK(bernoulli_binomial_term({3, 1}, {2, 1}) == doctest::Approx(-1.0));
  CHECK(bernoulli_binomial_term({3, 2}, {2, 1}) == doctest::Approx(1.0));
  CHECK(bernoulli_binomial_term({5, 3}, {2, 1}) == doctest::Approx(-3.0));
  CHECK(bernoulli_binomial_term({5, 0}, {2, 1}) == 0.0);
}

TEST_CASE("brute-force oracle sanity") {
  const auto one = make_config({0});
  CHECK(brute_force_correlations(one, 0.3, 1, {{1, 1}}) == doctest::Approx(0.3).epsilon(1e-14));
  const auto two = make_config({0, 3});
  // Three occupied sites at one time with two particles is impossible.
  CHECK(brute_force_correlations(two, 0.4, 2, {{2, 0}, {2, 1}, {2, 3}}) == 0.0);
  for (int64_t t = 1; t <= 3; ++t) {
    double total = 0;
    for (int64_t x = -1; x <= 8; ++x) total += brute_force_correlations(two, 0.4, 3, {{t, x}});
    CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
  }
  std::vector<int64_t> many(30);
  for (int k = 0; k < 30; ++k) many[static_cast<size_t>(k)] = 2 * k;
  CHECK(code_of([&] { brute_force_correlations(make_config(many), 0.5, 10, {{10, 0}}); }) == Errc::TooLarge);
}

TEST_CASE("kernel reproduces enumerated correlations for two walkers") {
  const auto d = make_config({0, 3});
  const double beta = 0.4;
  for (int64_t t = 1; t <= 3; ++t)
    for (int64_t x = -1; x <= 7; ++x) {
      const SpaceTimePoint p{t, x};
      const KernelValue kv = kernel_bernoulli(p, p, d, beta);
      CHECK(std::abs(kv.value.imag()) < 1e-12);
      CHECK(std::abs(kv.value.real() - brute_force_correlations(d, beta, 3, {p})) < 1e-8);
    }
  const SpaceTimePoint a{1, 1}, b{2, 3};
  CHECK(std::abs(correlation_determinant({a, b}, d, beta) - brute_force_correlations(d, beta, 3, {a, b})) < 1e-8);
}

TEST_CASE("determinantal structure on random tiny systems") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ub(0.2, 0.8);
  for (int trial = 0; trial < 40; ++trial) {
    const size_t k = 1 + rng() % 3;
    std::vector<int64_t> pos;
    int64_t p = 0;
    for (size_t i = 0; i < k; ++i) {
      pos.push_back(p);
      p += 1 + static_cast<int64_t>(rng() % 3);
    }
    const auto d = make_config(pos);
    const double beta = ub(rng);
    const int64_t T = 1 + static_cast<int64_t>(rng() % 3);
    const size_t npts = 1 + rng() % 3;
    std::vector<SpaceTimePoint> pts;
    while (pts.size() < npts) {
      const SpaceTimePoint q{1 + static_cast<int64_t>(rng() % static_cast<uint64_t>(T)),
                             static_cast<int64_t>(rng() % static_cast<uint64_t>(p + T + 1))};
      if (std::find(pts.begin(), pts.end(), q) == pts.end()) pts.push_back(q);
    }
    CHECK(std::abs(correlation_determinant(pts, d, beta) - brute_force_correlations(d, beta, T, pts)) < 1e-8);
  }
}

TEST_CASE("loop contours agree with the residue form") {
  const auto d = make_config({-4, -2, -1, 2, 3, 6});
  BernoulliOptions loop, res;
  loop.method = BernoulliMethod::Loop;
  res.method = BernoulliMethod::Residue;
  for (auto [p1, p2] : {std::pair<SpaceTimePoint, SpaceTimePoint>{{4, 1}, {4, 1}},
                        {{5, 2}, {3, 0}},
                        {{3, 0}, {6, 2}},
                        {{8, 4}, {8, 3}}}) {
    const auto a = kernel_bernoulli(p1, p2, d, 0.45, loop);
    const auto b = kernel_bernoulli(p1, p2, d, 0.45, res);
    CHECK(std::abs(a.value - b.value) < 1e-8);
    CHECK(a.method != b.method);
    CHECK(std::isfinite(a.peak_log));
  }
}

TEST_CASE("points far from every walker reduce to the binomial term") {
  const auto d = make_config({0, 1});
  const KernelValue kv = kernel_bernoulli({2, 50}, {1, 49}, d, 0.5);
  CHECK(kv.empty_pole_set);
  CHECK(kv.value.real() == doctest::Approx(bernoulli_binomial_term({2, 50}, {1, 49})));
  CHECK(code_of([&] { kernel_bernoulli({0, 0}, {1, 0}, d, 0.5); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { kernel_bernoulli({1, 0}, {1, 0}, d, 1.5); }) == Errc::InvalidArgument);
}

TEST_CASE("gauge factor leaves correlation determinants unchanged") {
  const auto d = make_config({0, 2, 3});
  const double beta = 0.4, B = 0.3;
  const std::vector<SpaceTimePoint> pts = {{1, 1}, {2, 2}, {3, 3}};
  Eigen::MatrixXd K(3, 3), G(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const auto& p = pts[static_cast<size_t>(a)];
      const auto& q = pts[static_cast<size_t>(b)];
      K(a, b) = kernel_bernoulli(p, q, d, beta).value.real();
      const double dx = static_cast<double>(p.x - q.x), dt = static_cast<double>(p.t - q.t);
      G(a, b) = std::pow(-1.0, dx) * std::pow(B, dx) * std::pow(1 - B, dt - dx) * K(a, b);
    }
  CHECK(std::abs(K.determinant() - G.determinant()) < 1e-10);
}

TEST_CASE("Pearcey kernel: value, realness and contour independence") {
  const KernelValue k0 = kernel_pearcey(0, 0, 0, 0);
  CHECK(k0.value.real() == doctest::Approx(0.155612323948).epsilon(1e-9));
  CHECK(std::abs(k0.value.imag()) < 1e-12);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2, 2);
  PearceyOptions other;
  other.vertex_shift = 0.9;
  other.panel = 0.15;
  other.order = 20;
  for (int k = 0; k < 20; ++k) {
    const double s = u(rng), x = u(rng), t = u(rng), y = u(rng);
    const KernelValue kv = kernel_pearcey(s, x, t, y);
    CHECK(std::abs(kv.value.imag()) < 1e-10);
    CHECK(kv.abs_error_estimate < 1e-6);
    CHECK(std::abs(kernel_pearcey_single(s, x, t, y, other) - kv.value) < 1e-8);
    // z -> -z, w -> -w maps the contours onto themselves.
    CHECK(std::abs(kernel_pearcey(s, -x, t, -y).value - kv.value) < 1e-9);
  }
  CHECK(pearcey_gaussian_term(1, 0, 0, 0) == 0.0);
  CHECK(pearcey_gaussian_term(0, 0, 0, 0) == 0.0);
  CHECK(pearcey_gaussian_term(0, 0, 2, 0) == doctest::Approx(-1 / std::sqrt(4 * M_PI)));
  // The matrix form shares nodes but must agree entrywise.
  const auto m = pearcey_matrix(-0.3, {0.1, 0.7}, 0.4, {-0.2, 0.5});
  CHECK(std::abs(m(1, 0) - kernel_pearcey(-0.3, 0.7, 0.4, -0.2).value.real()) < 1e-9);
  CHECK(code_of([] { kernel_pearcey(NAN, 0, 0, 0); }) == Errc::InvalidArgument);
}

TEST_CASE("rescaled NBRW kernel is close to Pearcey at n = 250") {
  const Symmetric s;
  const auto r = rescaled_kernel_pair(0, 0, 0, 0, 250, s.field, s.cusp);
  CHECK(std::abs(r.lhs.value.real() - r.rhs.value.real()) < 0.05);
  CHECK(r.lhs.abs_error_estimate < 1e-8);
  CHECK(r.p1.t == 250);
  CHECK(r.p1.x == 125);
}

TEST_CASE("prefactor asymptotics") {
  const Symmetric s;
  for (int64_t n : {500, 1000, 2000}) {
    const auto diag = prefactor_check({n, n / 2}, {n, n / 2}, n, s.cusp);
    CHECK(std::abs(diag.exact - diag.asymptotic) * std::sqrt(double(n)) < 10);
    // Offset by (tau, gamma) = (1, 1) in the Pearcey frame.
    const auto dt = static_cast<int64_t>(std::llround(std::sqrt(double(n))));
    const auto dx = static_cast<int64_t>(std::llround(0.5 * std::sqrt(double(n)) + std::pow(double(n), 0.25)));
    const auto off = prefactor_check({n + dt, n / 2 + dx}, {n, n / 2}, n, s.cusp);
    CHECK(std::abs(off.exact - off.asymptotic) * std::sqrt(double(n)) < 10);
  }
}

TEST_CASE("binomial local limit") {
  const auto bg = binomial_gaussian_check(400, 200, 0, 0, 0.5);
  CHECK(std::abs(bg.exact / bg.gaussian - 1) < 0.01);
  CHECK(code_of([] { binomial_gaussian_check(10, 11, 0, 0, 0.5); }) == Errc::OutOfSupport);
  CHECK(code_of([] { binomial_gaussian_check(10, -1, 0, 0, 0.5); }) == Errc::OutOfSupport);
  // Relative error at fixed Pearcey offsets decays at least like n^{-1/2}.
  for (double B : {0.3, 0.5}) {
    for (int64_t n : {1000, 10000, 100000}) {
      const double rn = std::sqrt(double(n));
      const auto t = static_cast<int64_t>(std::llround(rn));
      const auto x = static_cast<int64_t>(std::llround(B * rn + 0.5 * std::pow(double(n), 0.25)));
      const auto v = binomial_gaussian_check(t, x, 0, 0, B);
      CHECK(std::abs(v.exact / v.gaussian - 1) * rn < 10);
    }
  }
}

TEST_CASE("Fredholm determinants") {
  const auto K = pearcey_block_kernel();
  CHECK(fredholm_gap({0.0}, {{0.0, 0.0}}, K).value == 1.0);
  CHECK(fredholm_gap({}, {}, K).value == 1.0);
  // Rank-one kernel: det(I - K) = 1 - lambda int phi^2.
  const KernelBlockFn rank1 = [](double, const std::vector<double>& xs, double, const std::vector<double>& ys) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
    for (size_t a = 0; a < xs.size(); ++a)
      for (size_t b = 0; b < ys.size(); ++b)
        m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 0.5 * std::exp(-xs[a] * xs[a] - ys[b] * ys[b]);
    return m;
  };
  const double phi2 = std::sqrt(M_PI / 2) * std::erf(std::sqrt(2.0));
  CHECK(fredholm_gap({0.0}, {{-1, 1}}, rank1).value == doctest::Approx(1 - 0.5 * phi2).epsilon(1e-10));
  CHECK(fredholm_gap({0.0, 1.0}, {{-1, 1}, {-1, 1}}, rank1).value == doctest::Approx(1 - phi2).epsilon(1e-10));
  double prev = 1.0;
  for (double a : {0.5, 1.0, 1.5, 2.0}) {
    const auto r = fredholm_gap({0.0}, {{-a, a}}, K);
    CHECK(r.value < prev);
    CHECK(r.value > 0);
    CHECK(r.change < 1e-5);
    prev = r.value;
  }
  CHECK(fredholm_gap({0.0}, {{-1, 1}}, K).value == doctest::Approx(0.6359104280).epsilon(1e-8));
  const auto two = fredholm_gap({0.0, 0.5}, {{-1, 1}, {-1, 1}}, K);
  CHECK(two.value > 0);
  CHECK(two.value < fredholm_gap({0.0}, {{-1, 1}}, K).value);
  CHECK(code_of([&] { fredholm_gap({0.0}, {{-6, 6}}, K, 2, 1e-14, 8); }) == Errc::NotConverged);
}

TEST_CASE("discrete key functions") {
  const Symmetric s;
  for (int64_t n : {250, 1000}) {
    const KeyParams p = key_params(s, n);
    const double lo = p.d.at(-1), hi = p.d.at(0);
    for (int k = 0; k < 40; ++k) {
      const double x = (lo + (hi - lo) * (k + 0.5) / 40) / double(n);
      for (auto w : {KeyWhich::D1, KeyWhich::D2}) CHECK(std::abs(key_function_D(x, w, p).imag()) < 1e-10);
    }
    const double r = std::pow(double(n), -0.2) * s.cusp.t_c;
    CHECK(critical_point_winding(KeyWhich::D1, p, s.cusp.z_c, r) == 3);
    CHECK(critical_point_winding(KeyWhich::D2, p, s.cusp.z_c, r) == 3);
    for (auto w : {KeyWhich::D1, KeyWhich::D2}) {
      const auto q = key_quartic_check(w, p, s.cusp);
      CHECK(q.C < 10);
      const cplx z(0.05, 0.02);
      const double h = 1e-6;
      const cplx fd = (key_function_D(z + h, w, p) - key_function_D(z - h, w, p)) / (2 * h);
      CHECK(std::abs(fd - key_function_D_prime(z, w, p)) < 1e-5 * (1 + std::abs(fd)));
      // Schwarz reflection.
      CHECK(std::abs(key_function_D(std::conj(z), w, p) - std::conj(key_function_D(z, w, p))) < 1e-14);
    }
    // A particle position outside the D2 range is a pole.
    CHECK(code_of([&] { key_function_D(double(p.d.at(-5)) / double(n), KeyWhich::D2, p); }) == Errc::OnPole);
  }
}
