#include "pk/glauber.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pk/error.hpp"

namespace pk {

namespace {

void check_shape(const PathBoundary& d) {
  if (d.r < 0) fail(Errc::InvalidArgument, "negative time span");
  if (d.exit.size() != d.size()) fail(Errc::InvalidArgument, "entrance/exit size mismatch");
  const size_t cols = static_cast<size_t>(d.r + 1);
  if ((!d.left.empty() && d.left.size() != cols) || (!d.right.empty() && d.right.size() != cols))
    fail(Errc::InvalidArgument, "boundary functions must have r+1 entries");
}

}  // namespace

PathBoundary hexagon_paths(int64_t a, int64_t b, int64_t c) {
  PathBoundary d;
  d.r = b + c;
  for (int64_t i = 0; i < a; ++i) {
    d.entrance.push_back(i);
    d.exit.push_back(c + i);
  }
  return d;
}

Columns lowest_configuration(const PathBoundary& data) {
  check_shape(data);
  const size_t k = data.size();
  const int64_t r = data.r;
  Columns b(k, std::vector<int64_t>(static_cast<size_t>(r + 1)));
  for (size_t i = 0; i < k; ++i) {
    auto& p = b[i];
    for (int64_t t = 0; t <= r; ++t) {
      int64_t v = data.entrance[i];
      if (data.exit[i]) v = std::max(v, *data.exit[i] - (r - t));
      v = std::max(v, data.lo(t));
      if (i > 0) v = std::max(v, b[i - 1][static_cast<size_t>(t)] + 1);
      p[static_cast<size_t>(t)] = v;
    }
    // Lower Bernoulli envelope: b(t) >= b(t-1) and b(t) >= b(t+1) - 1.
    for (int64_t t = 1; t <= r; ++t) p[t] = std::max(p[t], p[t - 1]);
    for (int64_t t = r - 1; t >= 0; --t) p[t] = std::max(p[t], p[t + 1] - 1);
  }
  if (!is_admissible(data, b)) fail(Errc::Infeasible, "no admissible path configuration");
  return b;
}

bool is_admissible(const PathBoundary& data, const Columns& b) {
  const size_t k = data.size();
  if (b.size() != k) return false;
  for (size_t i = 0; i < k; ++i) {
    const auto& p = b[i];
    if (p.size() != static_cast<size_t>(data.r + 1)) return false;
    if (p.front() != data.entrance[i]) return false;
    if (data.exit[i] && p.back() != *data.exit[i]) return false;
    for (int64_t t = 0; t <= data.r; ++t) {
      const int64_t v = p[static_cast<size_t>(t)];
      if (v < data.lo(t) || v > data.hi(t)) return false;
      if (t > 0) {
        const int64_t s = v - p[static_cast<size_t>(t - 1)];
        if (s != 0 && s != 1) return false;
      }
      if (i > 0 && b[i - 1][static_cast<size_t>(t)] >= v) return false;
    }
  }
  return true;
}

PathEnsemble to_ensemble(const Columns& b) {
  PathEnsemble e;
  for (size_t i = 0; i < b.size(); ++i) e.paths.push_back(Path{static_cast<int64_t>(i), {PathSegment{0, b[i]}}});
  return e;
}

GlauberState make_state(const PathBoundary& data, uint64_t seed) {
  GlauberState s{data, lowest_configuration(data), std::mt19937_64(seed), 0};
  return s;
}

bool glauber_step(GlauberState& state, const GlauberSite& site) {
  const auto& d = state.data;
  if (site.t < 1 || site.t > d.r - 1 || site.i < 0 || site.i >= static_cast<int64_t>(d.size()) ||
      (site.e != 1 && site.e != -1))
    fail(Errc::SiteOutOfRange, "site outside the interior of the time span");
  ++state.sweep_count;
  auto& p = state.b[static_cast<size_t>(site.i)];
  const size_t t = static_cast<size_t>(site.t);
  const int64_t nv = p[t] + site.e;
  if (nv < p[t - 1] || nv > p[t - 1] + 1) return false;
  if (nv < p[t + 1] - 1 || nv > p[t + 1]) return false;
  if (nv < d.lo(site.t) || nv > d.hi(site.t)) return false;
  if (site.i > 0 && nv <= state.b[static_cast<size_t>(site.i - 1)][t]) return false;
  if (site.i + 1 < static_cast<int64_t>(d.size()) && nv >= state.b[static_cast<size_t>(site.i + 1)][t]) return false;
  p[t] = nv;
  return true;
}

GlauberSite random_site(const PathBoundary& data, std::mt19937_64& rng) {
  const uint64_t k = data.size();
  const uint64_t inner = static_cast<uint64_t>(data.r - 1);
  std::uniform_int_distribution<uint64_t> u(0, 2 * k * inner - 1);
  const uint64_t s = u(rng);
  return GlauberSite{static_cast<int64_t>(1 + (s / 2) % inner), static_cast<int64_t>((s / 2) / inner),
                     (s % 2) ? 1 : -1};
}

namespace {
uint64_t burn_in_for(uint64_t sites) {
  if (sites == 0) return 0;
  const double l = std::ceil(std::log2(static_cast<double>(sites)) + 1.0);
  return 10 * sites * static_cast<uint64_t>(l);
}
}  // namespace

uint64_t default_burn_in(const PathBoundary& data) {
  if (data.r < 2 || data.size() == 0) return 0;
  return burn_in_for(2 * data.size() * static_cast<uint64_t>(data.r - 1));
}

PathSampler::PathSampler(const PathBoundary& data, uint64_t seed) : state_(make_state(data, seed)) {
  for (const auto& e : data.exit)
    if (!e) fail(Errc::InvalidArgument, "sampler requires fixed exits");
}

void PathSampler::run(uint64_t updates) {
  if (state_.data.r < 2 || state_.data.size() == 0) return;
  for (uint64_t u = 0; u < updates; ++u) glauber_step(state_, random_site(state_.data, state_.rng));
}

PathEnsemble sample_uniform_paths(const PathBoundary& data, std::optional<uint64_t> updates, uint64_t seed) {
  PathSampler s(data, seed);
  s.run(updates.value_or(default_burn_in(data)));
  return to_ensemble(s.columns());
}

int64_t max_difference(const Columns& a, const Columns& b) {
  int64_t m = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t t = 0; t < a[i].size(); ++t) m = std::max(m, std::abs(a[i][t] - b[i][t]));
  return m;
}

CoupledPair make_coupled_pair(const PathBoundary& da, const PathBoundary& db, int64_t K, uint64_t seed) {
  if (da.size() != db.size() || da.r != db.r) fail(Errc::InvalidArgument, "coupled data differ in shape");
  if (da.left != db.left || da.right != db.right)
    fail(Errc::InvalidArgument, "coupled data must share left/right boundaries");
  for (size_t i = 0; i < da.size(); ++i) {
    if (std::abs(da.entrance[i] - db.entrance[i]) > K) fail(Errc::InvalidArgument, "entrances differ by more than K");
    if (!da.exit[i] || !db.exit[i]) fail(Errc::InvalidArgument, "coupled chains require fixed exits");
    if (std::abs(*da.exit[i] - *db.exit[i]) > K) fail(Errc::InvalidArgument, "exits differ by more than K");
  }
  return CoupledPair{make_state(da, seed), make_state(db, seed ^ 0x5bd1e995ULL), K, std::mt19937_64(seed)};
}

std::vector<int64_t> coupled_run(CoupledPair& pair, uint64_t updates) {
  std::vector<int64_t> trace{max_difference(pair.a.b, pair.b.b)};
  if (pair.a.data.r < 2 || pair.a.data.size() == 0) return trace;
  for (uint64_t u = 0; u < updates; ++u) {
    const GlauberSite s = random_site(pair.a.data, pair.stream);
    const bool acc_a = glauber_step(pair.a, s);
    const bool acc_b = glauber_step(pair.b, s);
    if (acc_a || acc_b) trace.push_back(max_difference(pair.a.b, pair.b.b));
  }
  return trace;
}

bool height_flip(HeightFunction& h, size_t v, int e) {
  const auto& d = *h.domain;
  const int64_t nv = h.values[v] + e;
  for (int dir = 0; dir < 6; ++dir) {
    const int64_t w = d.neighbour(v, dir);
    if (w < 0) return false;
    if (!admissible_increment(dir, h.values[static_cast<size_t>(w)] - nv)) return false;
  }
  h.values[v] = nv;
  return true;
}

HeightState make_height_state(const LatticeDomain& domain, uint64_t seed) {
  auto t = find_tiling(domain);
  if (!t) fail(Errc::NotTileable, "domain admits no tiling");
  auto dp = std::make_shared<const LatticeDomain>(domain);
  HeightState s{canonical_height(height_from_tiling(dp, *t, dp->vertices().front(), 0)), {}, std::mt19937_64(seed)};
  for (size_t i = 0; i < dp->vertices().size(); ++i)
    if (!dp->on_boundary(i)) s.interior.push_back(i);
  return s;
}

uint64_t default_burn_in(const LatticeDomain& domain) {
  size_t interior = 0;
  for (size_t i = 0; i < domain.vertices().size(); ++i) interior += domain.on_boundary(i) ? 0 : 1;
  return burn_in_for(2 * interior);
}

void run_height_chain(HeightState& s, uint64_t updates) {
  if (s.interior.empty()) return;
  std::uniform_int_distribution<uint64_t> u(0, 2 * s.interior.size() - 1);
  for (uint64_t k = 0; k < updates; ++k) {
    const uint64_t x = u(s.rng);
    height_flip(s.h, s.interior[x / 2], (x % 2) ? 1 : -1);
  }
}

Tiling sample_uniform_tiling(const LatticeDomain& domain, std::optional<uint64_t> updates, uint64_t seed) {
  HeightState s = make_height_state(domain, seed);
  run_height_chain(s, updates.value_or(default_burn_in(domain)));
  return tiling_from_height(s.h);
}

uint64_t coupled_height_run(HeightFunction& h1, HeightFunction& h2, uint64_t updates, uint64_t seed) {
  const auto& d = *h1.domain;
  std::vector<size_t> interior;
  for (size_t i = 0; i < d.vertices().size(); ++i)
    if (!d.on_boundary(i)) interior.push_back(i);
  uint64_t violations = 0;
  if (interior.empty()) return 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint64_t> u(0, 2 * interior.size() - 1);
  for (uint64_t k = 0; k < updates; ++k) {
    const uint64_t x = u(rng);
    const size_t v = interior[x / 2];
    const int e = (x % 2) ? 1 : -1;
    height_flip(h1, v, e);
    height_flip(h2, v, e);
    if (h1.values[v] > h2.values[v]) ++violations;
  }
  return violations;
}

HeightFunction extreme_height(const LatticeDomain& domain, bool highest) {
  HeightState s = make_height_state(domain, 0);
  HeightFunction h = s.h;
  const auto& d = *h.domain;
  // Difference-constraint relaxation with boundary values held fixed.
  const int64_t init = highest ? kPosInf : kNegInf;
  for (size_t v : s.interior) h.values[v] = init;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t v = 0; v < h.values.size(); ++v) {
      if (d.on_boundary(v)) continue;
      for (int dir = 0; dir < 6; ++dir) {
        const int64_t w = d.neighbour(v, dir);
        const int64_t hw = h.values[static_cast<size_t>(w)];
        if (hw == kPosInf || hw == kNegInf) continue;
        // Allowed H(v) - H(w) range is the negated increment range of w->v.
        const int rev = (dir + 3) % 6;
        int64_t lo = 0, hi = 0;
        for (int64_t dh : {-1, 0, 1})
          if (admissible_increment(rev, dh)) {
            lo = std::min(lo, dh);
            hi = std::max(hi, dh);
          }
        const int64_t cand = highest ? hw + hi : hw + lo;
        int64_t& hv = h.values[v];
        if (highest ? (cand < hv) : (cand > hv)) {
          hv = cand;
          changed = true;
        }
      }
    }
  }
  return h;
}

std::vector<Columns> enumerate_configs(const PathBoundary& data, size_t limit) {
  check_shape(data);
  const size_t k = data.size();
  const int64_t r = data.r;
  std::vector<Columns> out;
  Columns cur(k, std::vector<int64_t>(static_cast<size_t>(r + 1)));
  for (size_t i = 0; i < k; ++i) {
    cur[i][0] = data.entrance[i];
    if (cur[i][0] < data.lo(0) || cur[i][0] > data.hi(0)) return out;
    if (i > 0 && cur[i - 1][0] >= cur[i][0]) return out;
  }
  // Recursion over time t, then particle i within the column.
  std::function<void(int64_t, size_t)> rec = [&](int64_t t, size_t i) {
    if (t == r) {
      out.push_back(cur);
      if (out.size() > limit) fail(Errc::TooLarge, "configuration space exceeds the enumeration guard");
      return;
    }
    if (i == k) {
      rec(t + 1, 0);
      return;
    }
    const size_t tn = static_cast<size_t>(t + 1);
    for (int e = 0; e <= 1; ++e) {
      const int64_t v = cur[i][static_cast<size_t>(t)] + e;
      if (v < data.lo(t + 1) || v > data.hi(t + 1)) continue;
      if (i > 0 && cur[i - 1][tn] >= v) continue;
      if (data.exit[i]) {
        const int64_t need = *data.exit[i] - v;
        if (need < 0 || need > r - t - 1) continue;
      }
      cur[i][tn] = v;
      rec(t, i + 1);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace pk
