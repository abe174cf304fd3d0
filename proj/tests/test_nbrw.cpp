// Non-intersecting Bernoulli walks: transition law, sampler, quantile data and
// Pearcey rescaling.

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "pk/error.hpp"
#include "pk/nbrw.hpp"

using namespace pk;

namespace {

// All y = x + e with e in {0,1}^k and their weights.
std::vector<std::pair<ParticleConfig, double>> successors(const ParticleConfig& x, double beta) {
  std::vector<std::pair<ParticleConfig, double>> out;
  const size_t k = x.size();
  for (uint64_t mask = 0; mask < (uint64_t{1} << k); ++mask) {
    ParticleConfig y = x;
    for (size_t i = 0; i < k; ++i) y.pos[i] += (mask >> i) & 1;
    out.emplace_back(y, transition_weight(x, y, beta));
  }
  return out;
}

ParticleConfig random_config(std::mt19937_64& rng, size_t k) {
  std::vector<int64_t> pos;
  int64_t p = static_cast<int64_t>(rng() % 5) - 2;
  for (size_t i = 0; i < k; ++i) {
    pos.push_back(p);
    p += 1 + static_cast<int64_t>(rng() % 4);
  }
  return make_config(pos);
}

}  // namespace

TEST_CASE("transition law examples") {
  const auto one = make_config({0});
  CHECK(transition_weight(one, make_config({1}), 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(transition_weight(one, make_config({0}), 0.3) == doctest::Approx(0.7).epsilon(1e-14));
  const auto x = make_config({0, 1});
  CHECK(transition_weight(x, make_config({0, 1}), 0.5) == doctest::Approx(0.25).epsilon(1e-14));
  // Vandermonde ratio 2 for the spreading move.
  CHECK(transition_weight(x, make_config({0, 2}), 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(transition_weight(x, make_config({1, 2}), 0.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(transition_weight(x, ParticleConfig{0, 1, {1, 1}}, 0.5) == 0.0);
  CHECK(transition_weight(x, make_config({0, 3}), 0.5) == 0.0);
  CHECK(std::isinf(log_transition_weight(x, make_config({0, 3}), 0.5)));
  CHECK_THROWS_AS(transition_weight(x, make_config({0, 1, 2}), 0.5), Error);
  CHECK_THROWS_AS(transition_weight(x, make_config({0, 1}, 1), 0.5), Error);
}

TEST_CASE("transition law is normalized and translation invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ub(0.05, 0.95);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t k = 1 + rng() % 8;
    const auto x = random_config(rng, k);
    const double beta = ub(rng);
    double total = 0;
    for (const auto& [y, w] : successors(x, beta)) {
      CHECK(w >= 0.0);
      total += w;
      ParticleConfig xs = x, ys = y;
      for (auto& p : xs.pos) p += 17;
      for (auto& p : ys.pos) p += 17;
      if (w > 0) CHECK(transition_weight(xs, ys, beta) == doctest::Approx(w).epsilon(1e-12));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sequential conditionals agree with enumeration in both bases") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ub(0.1, 0.9);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t k = 1 + rng() % 6;
    const auto x = random_config(rng, k);
    const double beta = ub(rng);
    const auto succ = successors(x, beta);
    std::vector<int> prefix;
    for (size_t j = 0; j < k; ++j) {
      double num = 0, den = 0;
      for (const auto& [y, w] : succ) {
        bool match = true;
        for (size_t i = 0; i < prefix.size(); ++i) match = match && (y.pos[i] - x.pos[i] == prefix[i]);
        if (!match) continue;
        den += w;
        if (y.pos[j] - x.pos[j] == 1) num += w;
      }
      const double pm = conditional_jump_probability(x, beta, prefix, PolyBasis::Monomial);
      const double pf = conditional_jump_probability(x, beta, prefix, PolyBasis::FallingFactorial);
      CHECK(pm == doctest::Approx(num / den).epsilon(1e-9));
      CHECK(pf == doctest::Approx(pm).epsilon(1e-9));
      // Continue along a branch of positive probability.
      prefix.push_back(pm > 0.5 ? 1 : (pm > 0 ? static_cast<int>(rng() % 2) : 0));
      if (prefix.back() == 1 && pm == 0) prefix.back() = 0;
      if (prefix.back() == 0 && pm == 1) prefix.back() = 1;
    }
  }
}

TEST_CASE("exact sampler reproduces the transition law") {
  {
    NbrwChain c = make_chain(make_config({0}), 0.3, 1);
    const int n = 100000;
    int jumps = 0;
    for (int k = 0; k < n; ++k) {
      c.config = make_config({0});
      jumps += step_exact(c).pos[0] == 1;
    }
    const double sigma = std::sqrt(0.3 * 0.7 / n);
    CHECK(std::abs(jumps / double(n) - 0.3) < 3 * sigma);
  }
  {
    const auto x = make_config({0, 1});
    NbrwChain c = make_chain(x, 0.5, 2);
    std::map<std::vector<int64_t>, double> counts;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      c.config = x;
      counts[step_exact(c).pos] += 1;
    }
    CHECK(counts.size() == 3);
    const double e[3] = {0.25, 0.5, 0.25};
    const std::vector<int64_t> keys[3] = {{0, 1}, {0, 2}, {1, 2}};
    double x2 = 0;
    for (int i = 0; i < 3; ++i) x2 += std::pow(counts[keys[i]] - n * e[i], 2) / (n * e[i]);
    boost::math::chi_squared dist(2);
    CHECK(boost::math::cdf(boost::math::complement(dist, x2)) > 0.01);
  }
  {
    const auto x = make_config({0, 1, 3, 4, 7});
    const auto succ = successors(x, 0.4);
    NbrwChain c = make_chain(x, 0.4, 3);
    std::map<std::vector<int64_t>, double> counts;
    const int n = 1000000;
    for (int k = 0; k < n; ++k) {
      c.config = x;
      counts[step_exact(c).pos] += 1;
    }
    double tv = 0;
    for (const auto& [y, w] : succ) tv += std::abs(counts[y.pos] / n - w);
    CHECK(tv / 2 < 0.01);
    CHECK(c.step_index == n);
  }
}

TEST_CASE("two walkers over three steps match enumeration") {
  const auto x0 = make_config({0, 3});
  const double beta = 0.4;
  std::map<std::vector<int64_t>, double> exact{{x0.pos, 1.0}};
  for (int s = 0; s < 3; ++s) {
    std::map<std::vector<int64_t>, double> next;
    for (const auto& [p, w] : exact)
      for (const auto& [y, wy] : successors(make_config(p), beta)) next[y.pos] += w * wy;
    exact = next;
  }
  std::map<std::vector<int64_t>, double> counts;
  const int reps = 200000;
  NbrwChain c = make_chain(x0, beta, 99);
  for (int r = 0; r < reps; ++r) {
    c.config = x0;
    for (int s = 0; s < 3; ++s) step_exact(c);
    counts[c.config.pos] += 1;
  }
  double tv = 0;
  for (const auto& [p, w] : exact) tv += std::abs(counts[p] / reps - w);
  CHECK(tv / 2 < 0.01);

  const auto traj = simulate(x0, beta, 0, 5);
  REQUIRE(traj.size() == 1);
  CHECK(traj[0] == x0);
  const auto t3 = simulate(x0, beta, 3, 5);
  CHECK(t3.size() == 4);
  // Same seed, same trajectory.
  CHECK(simulate(x0, beta, 3, 5) == t3);
}

TEST_CASE("mean displacement per step tends to beta for separated walkers") {
  const auto x0 = make_config({0, 10, 20, 30});
  const double beta = 0.35;
  const int64_t T = 2000;
  const auto traj = simulate(x0, beta, T, 8);
  double disp = 0;
  for (size_t i = 0; i < x0.size(); ++i) disp += static_cast<double>(traj.back().pos[i] - x0.pos[i]);
  const double mean = disp / (static_cast<double>(x0.size()) * T);
  // Interaction repels the extreme walkers symmetrically, so the centre of
  // mass drifts at beta up to O(1/T) corrections.
  CHECK(std::abs(mean - beta) < 3 * std::sqrt(beta * (1 - beta) / (4.0 * T)) + 0.01);
}

TEST_CASE("quantile initial data") {
  const auto rho = symmetric_two_block();
  const auto d = quantile_initial(rho, 300, 200, 200);
  CHECK(d.at(0) == 100);
  CHECK(d.at(200) == 300);
  CHECK(d.at(-200) == -300);
  // gamma_{-1} = -1/3 - 1/300, hence -101.
  CHECK(d.at(-1) == -101);
  validate_config(d);
  // Mass matching: counting functions agree to within one particle.
  const auto g = quantiles(rho, 300, 200, 200);
  for (double x = -1.2; x <= 1.2; x += 0.01) {
    int64_t nd = 0, ng = 0;
    for (int64_t p : d.pos) nd += p < x * 300;
    for (double q : g) ng += q < x;
    CHECK(std::abs(nd - ng) <= 1);
  }
  // Full blocks give consecutive integers.
  const DensityProfile full({{-0.5, -0.2, 1.0}, {0.2, 0.5, 1.0}});
  const auto c = quantile_initial(full, 10, 3, 3);
  CHECK(c.pos == std::vector<int64_t>{-5, -4, -3, 2, 3, 4, 5});
  CHECK_THROWS_AS(quantile_initial(rho, 300, 201, 200), Error);
}

TEST_CASE("Pearcey rescaling arithmetic") {
  PearceyFrame f{10000, 0.5, 1.0, 3.0, 0.5};
  CHECK(pearcey_time(f, 0) == 10000);
  // 2 sqrt3 (1/4) sqrt(1e4) = 86.60...
  CHECK(pearcey_time(f, 1) == 9913);
  std::vector<ParticleConfig> traj(10001, make_config({5000, 5001}));
  const auto r0 = rescale_pearcey(traj, f, {0});
  const double den = std::sqrt(2.0) * std::pow(3.0, 0.25) * 0.25 * 10.0;
  CHECK(r0[0][0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r0[0][1] == doctest::Approx(1.0 / den).epsilon(1e-12));
  // Shifting all positions by s shifts outputs by s / den.
  std::vector<ParticleConfig> shifted(10001, make_config({5007, 5008}));
  const auto r1 = rescale_pearcey(shifted, f, {0.5});
  const auto r2 = rescale_pearcey(traj, f, {0.5});
  CHECK(r1[0][0] - r2[0][0] == doctest::Approx(7.0 / den).epsilon(1e-12));
  CHECK_THROWS_AS(rescale_pearcey(traj, f, {-1.0}), Error);
  PearceyFrame bad = f;
  bad.B = 1.0;
  CHECK_THROWS_AS(pearcey_time(bad, 0), Error);

  // (r, q) form: r = 2, q = 1 shifts the time by sqrt(n)/2 = 50 at t = 1.
  CHECK(tiling_time(2, 1, 1.0, 10000, 1.0) == 9950);
  // Under the curvature map r=2, q=1 -> A=1, B=1/2, Pearcey tau and tiling t
  // name the same lattice time when tau = t sqrt(r-1) / (2 sqrt(A) B(1-B) r q).
  PearceyFrame g{10000, 0.5, 1.0, 1.0, 0.5};
  const double t = 0.8, tau = t * 1.0 / (2 * 1.0 * 0.25 * 2 * 1.0);
  CHECK(std::abs(pearcey_time(g, tau) - tiling_time(2, 1, 1.0, 10000, t)) <= 1);
  std::vector<ParticleConfig> wide(10001, make_config({4990, 5000, 5013}));
  const auto a = rescale_pearcey(wide, g, {tau});
  const auto b = rescale_tiling(wide, 2, 1, 0.5, 1.0, 10000, {t});
  // Both are affine in the position with the same slope up to the constant
  // conversion factor; differences of outputs must agree in ratio.
  const double ra = (a[0][2] - a[0][0]) / (a[0][1] - a[0][0]);
  const double rb = (b[0][2] - b[0][0]) / (b[0][1] - b[0][0]);
  CHECK(ra == doctest::Approx(rb).epsilon(1e-12));
  CHECK(default_horizon(1.0, 300) == 360);
  std::ostringstream os;
  write_trajectory_csv(os, {make_config({1, 2})});
  CHECK(os.str() == "step,label,position\n0,0,1\n0,1,2\n");
}
