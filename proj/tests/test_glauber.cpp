// Glauber dynamics on paths and tilings, coupling, and the enumerator.

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <random>

#include "pk/error.hpp"
#include "pk/glauber.hpp"

using namespace pk;

namespace {

double chi2_pvalue(const std::vector<double>& counts, double total) {
  const double expect = total / static_cast<double>(counts.size());
  double x2 = 0;
  for (double c : counts) x2 += (c - expect) * (c - expect) / expect;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, x2));
}

// Lindstrom-Gessel-Viennot count for 2 paths with free gap constraints only.
double lgv2(int64_t r, int64_t a0, int64_t a1, int64_t b0, int64_t b1) {
  auto C = [r](int64_t k) -> double {
    if (k < 0 || k > r) return 0;
    double v = 1;
    for (int64_t j = 1; j <= k; ++j) v = v * static_cast<double>(r - k + j) / static_cast<double>(j);
    return v;
  };
  return C(b0 - a0) * C(b1 - a1) - C(b1 - a0) * C(b0 - a1);
}

PathBoundary single(int64_t r, int64_t entrance, std::optional<int64_t> exit) {
  PathBoundary d;
  d.r = r;
  d.entrance = {entrance};
  d.exit = {exit};
  return d;
}

}  // namespace

TEST_CASE("single-site moves follow the Bernoulli and ordering rules") {
  GlauberState s = make_state(single(2, 0, 0), 1);
  CHECK_FALSE(glauber_step(s, {1, 0, +1}));  // 0,1,0 is not Bernoulli
  s = make_state(single(2, 0, 1), 1);
  REQUIRE(s.b[0] == std::vector<int64_t>{0, 0, 1});
  CHECK(glauber_step(s, {1, 0, +1}));
  CHECK(s.b[0] == std::vector<int64_t>{0, 1, 1});
  CHECK(s.sweep_count == 1);

  PathBoundary two;
  two.r = 2;
  two.entrance = {0, 1};
  two.exit = {1, 2};
  s = make_state(two, 1);
  CHECK(s.b == Columns{{0, 0, 1}, {1, 1, 2}});
  CHECK_FALSE(glauber_step(s, {1, 0, +1}));  // would collide with path 1
  CHECK(glauber_step(s, {1, 1, +1}));

  auto code = [&](GlauberSite site) {
    try {
      glauber_step(s, site);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  CHECK(code({0, 0, 1}) == Errc::SiteOutOfRange);
  CHECK(code({2, 0, 1}) == Errc::SiteOutOfRange);
  CHECK(code({1, 2, 1}) == Errc::SiteOutOfRange);
}

TEST_CASE("one path with two configurations is sampled evenly") {
  PathSampler ps(single(2, 0, 1), 11);
  int up = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    ps.run(10);
    up += ps.columns()[0][1] == 1;
  }
  CHECK(std::abs(up / double(n) - 0.5) < 0.01);
}

TEST_CASE("2x2x2 hexagon paths are sampled uniformly") {
  const PathBoundary d = hexagon_paths(2, 2, 2);
  const auto all = enumerate_configs(d);
  REQUIRE(all.size() == 20);
  CHECK(lgv2(d.r, 0, 1, 2, 3) == 20);
  std::map<Columns, int> idx;
  for (size_t k = 0; k < all.size(); ++k) idx[all[k]] = static_cast<int>(k);
  PathSampler ps(d, 5);
  ps.run(default_burn_in(d));
  std::vector<double> counts(all.size());
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    ps.run(50);
    counts[static_cast<size_t>(idx.at(ps.columns()))] += 1;
  }
  CHECK(chi2_pvalue(counts, n) > 0.01);
}

TEST_CASE("uniform measure is stationary for the exact transition matrix") {
  const PathBoundary d = hexagon_paths(2, 2, 2);
  const auto all = enumerate_configs(d);
  std::map<Columns, size_t> idx;
  for (size_t k = 0; k < all.size(); ++k) idx[all[k]] = k;
  const size_t S = all.size();
  const int64_t sites = 2 * 2 * (d.r - 1);
  std::vector<double> next(S, 0.0);
  for (size_t k = 0; k < S; ++k)
    for (int64_t t = 1; t < d.r; ++t)
      for (int64_t i = 0; i < 2; ++i)
        for (int e : {-1, 1}) {
          GlauberState s{d, all[k], std::mt19937_64(0), 0};
          glauber_step(s, {t, i, e});
          CHECK(is_admissible(d, s.b));
          next[idx.at(s.b)] += 1.0 / double(S) / double(sites);
        }
  for (double p : next) CHECK(std::abs(p - 1.0 / double(S)) < 1e-12);
}

TEST_CASE("zero-slack boundary returns its only configuration") {
  const auto e = sample_uniform_paths(single(3, 0, 0), std::nullopt, 3);
  REQUIRE(e.paths.size() == 1);
  CHECK(e.paths[0].segments[0].pos == std::vector<int64_t>{0, 0, 0, 0});
  CHECK(default_burn_in(single(3, 0, 0)) > 0);
}

TEST_CASE("enumerator on small data") {
  PathBoundary d = single(2, 0, std::nullopt);
  d.right = {2, 2, 2};
  const auto all = enumerate_configs(d);
  CHECK(all.size() == 4);
  // Infeasible: exit below the entrance.
  CHECK(enumerate_configs(single(2, 3, 1)).empty());
  // LGV cross-check on a wider hexagon.
  CHECK(static_cast<double>(enumerate_configs(hexagon_paths(2, 3, 2)).size()) == lgv2(5, 0, 1, 2, 3));
  CHECK_THROWS_AS(enumerate_configs(hexagon_paths(4, 4, 4), 100), Error);
  CHECK_THROWS_AS(lowest_configuration(single(2, 3, 1)), Error);
}

TEST_CASE("coupled chains stay within K") {
  std::mt19937_64 rng(77);
  int tested = 0;
  while (tested < 200) {
    const int64_t k = 1 + static_cast<int64_t>(rng() % 3);
    const int64_t r = 3 + static_cast<int64_t>(rng() % 6);
    const int64_t K = static_cast<int64_t>(rng() % 3);
    PathBoundary da;
    da.r = r;
    for (int64_t i = 0; i < k; ++i) {
      da.entrance.push_back(2 * i);
      da.exit.push_back(2 * i + static_cast<int64_t>(rng() % static_cast<uint64_t>(r + 1)));
    }
    PathBoundary db = da;
    for (auto& e : db.exit) *e += K;
    try {
      lowest_configuration(da);
      lowest_configuration(db);
    } catch (const Error&) {
      continue;
    }
    CoupledPair pair = make_coupled_pair(da, db, K, rng());
    const auto trace = coupled_run(pair, 2000);
    for (int64_t m : trace) CHECK(m <= K);
    ++tested;
  }
  // Identical data stay identical.
  const auto d = hexagon_paths(2, 2, 2);
  CoupledPair same = make_coupled_pair(d, d, 0, 1);
  for (int64_t m : coupled_run(same, 5000)) CHECK(m == 0);
  PathBoundary far = d;
  *far.exit[0] += 3;
  CHECK_THROWS_AS(make_coupled_pair(d, far, 1, 0), Error);
}

TEST_CASE("conditional law matches direct sampling of the sub-domain") {
  // Condition the 2x2x2 chain on the column at t = 2 and compare the law of
  // the t = 1 column with sampling the sub-domain [0, 2] directly.
  const PathBoundary d = hexagon_paths(2, 2, 2);
  PathSampler ps(d, 9);
  ps.run(default_burn_in(d));
  const std::vector<int64_t> cond = {1, 2};
  std::map<std::vector<int64_t>, double> global, direct;
  double ng = 0;
  for (int k = 0; k < 200000 && ng < 20000; ++k) {
    ps.run(30);
    const auto& b = ps.columns();
    if (b[0][2] != cond[0] || b[1][2] != cond[1]) continue;
    global[{b[0][1], b[1][1]}] += 1;
    ng += 1;
  }
  REQUIRE(ng > 5000);
  PathBoundary sub;
  sub.r = 2;
  sub.entrance = d.entrance;
  sub.exit = {cond[0], cond[1]};
  PathSampler direct_chain(sub, 10);
  const int nd = 20000;
  for (int k = 0; k < nd; ++k) {
    direct_chain.run(20);
    const auto& b = direct_chain.columns();
    direct[{b[0][1], b[1][1]}] += 1;
  }
  std::map<std::vector<int64_t>, double> keys = global;
  for (auto& [k, v] : direct) keys[k] += 0;
  double tv = 0;
  for (auto& [k, v] : keys) tv += std::abs(global[k] / ng - direct[k] / nd);
  CHECK(tv / 2 < 0.05);
}

TEST_CASE("height chain samples 1x1x1 and 2x2x2 tilings uniformly") {
  for (int side : {1, 2}) {
    const auto dom = hexagon(side, side, side);
    const auto all = enumerate_tilings(dom);
    std::map<std::vector<Lozenge>, size_t> idx;
    for (size_t k = 0; k < all.size(); ++k) idx[all[k].lozenges] = k;
    HeightState s = make_height_state(dom, 21 + static_cast<uint64_t>(side));
    run_height_chain(s, default_burn_in(dom));
    std::vector<double> counts(all.size());
    const int n = side == 1 ? 100000 : 40000;
    for (int k = 0; k < n; ++k) {
      run_height_chain(s, 40);
      counts[idx.at(tiling_from_height(s.h).lozenges)] += 1;
    }
    if (side == 1) CHECK(std::abs(counts[0] / n - 0.5) < 0.01);
    CHECK(chi2_pvalue(counts, n) > 0.01);
  }
}

TEST_CASE("monotone coupling of height chains preserves order") {
  const auto dom = hexagon(2, 3, 2);
  HeightFunction lo = extreme_height(dom, false), hi = extreme_height(dom, true);
  for (size_t v = 0; v < lo.values.size(); ++v) CHECK(lo.values[v] <= hi.values[v]);
  CHECK_FALSE(lo == hi);
  // Both extremes are genuine height functions.
  tiling_from_height(lo);
  tiling_from_height(hi);
  CHECK(coupled_height_run(lo, hi, 20000, 4) == 0);
  const auto t = sample_uniform_tiling(dom, std::nullopt, 8);
  validate_tiling(dom, t);
}
