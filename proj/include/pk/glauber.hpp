#pragma once
// Random-scan Glauber dynamics for non-intersecting Bernoulli paths and for
// lozenge tilings (height flips), the shared-stream monotone coupling, and an
// exhaustive enumerator used as an oracle.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pk/lattice.hpp"

namespace pk {

// Paths i = 0..k-1 on times 0..r with b_i(0) = entrance[i], b_i(r) = exit[i]
// (nullopt: free), f(t) <= b_i(t) <= g(t). Empty left/right mean unbounded;
// kNegInf/kPosInf entries act as sentinels.
struct PathBoundary {
  int64_t r = 0;
  std::vector<int64_t> entrance;
  std::vector<std::optional<int64_t>> exit;
  std::vector<int64_t> left, right;

  size_t size() const { return entrance.size(); }
  int64_t lo(int64_t t) const { return left.empty() ? kNegInf : left[static_cast<size_t>(t)]; }
  int64_t hi(int64_t t) const { return right.empty() ? kPosInf : right[static_cast<size_t>(t)]; }
};

// Entrance {0..a-1}, exit {c..c+a-1}, r = b + c: the path encoding of the
// a x b x c hexagon.
PathBoundary hexagon_paths(int64_t a, int64_t b, int64_t c);

using Columns = std::vector<std::vector<int64_t>>;  // b[i][t]

struct GlauberSite {
  int64_t t = 1;
  int64_t i = 0;
  int e = +1;
};

struct GlauberState {
  PathBoundary data;
  Columns b;
  std::mt19937_64 rng;
  uint64_t sweep_count = 0;  // single-site update attempts performed
};

// Unique pointwise-lowest admissible configuration; throws Infeasible.
Columns lowest_configuration(const PathBoundary& data);
bool is_admissible(const PathBoundary& data, const Columns& b);
PathEnsemble to_ensemble(const Columns& b);

GlauberState make_state(const PathBoundary& data, uint64_t seed);
bool glauber_step(GlauberState& state, const GlauberSite& site);
// Uniform random site among the 2 k (r-1) interior (t, i, e) choices.
GlauberSite random_site(const PathBoundary& data, std::mt19937_64& rng);
uint64_t default_burn_in(const PathBoundary& data);

// `updates` single-site attempts (default: default_burn_in). Requires every
// exit to be fixed.
PathEnsemble sample_uniform_paths(const PathBoundary& data, std::optional<uint64_t> updates, uint64_t seed);
// A chain reused for repeated thinned draws.
class PathSampler {
 public:
  PathSampler(const PathBoundary& data, uint64_t seed);
  void run(uint64_t updates);
  const Columns& columns() const { return state_.b; }

 private:
  GlauberState state_;
};

struct CoupledPair {
  GlauberState a, b;
  int64_t K = 0;
  std::mt19937_64 stream;
};
// Both states start from their lowest configurations. Throws InvalidArgument
// unless the two data sets have equal shape, identical f/g and
// entrance/exit within K.
CoupledPair make_coupled_pair(const PathBoundary& da, const PathBoundary& db, int64_t K, uint64_t seed);
int64_t max_difference(const Columns& a, const Columns& b);
// Applies `updates` shared sites; returns max |a_i(t) - b_i(t)| initially and
// after every update accepted by at least one chain.
std::vector<int64_t> coupled_run(CoupledPair& pair, uint64_t updates);

// Height-flip chain on a tileable domain.
struct HeightState {
  HeightFunction h;
  std::vector<size_t> interior;  // interior vertex indices
  std::mt19937_64 rng;
};
HeightState make_height_state(const LatticeDomain& domain, uint64_t seed);
// Attempts H(v) += e at interior vertex index v; true if legal and applied.
bool height_flip(HeightFunction& h, size_t v, int e);
uint64_t default_burn_in(const LatticeDomain& domain);
Tiling sample_uniform_tiling(const LatticeDomain& domain, std::optional<uint64_t> updates, uint64_t seed);
void run_height_chain(HeightState& s, uint64_t updates);
// Shared-stream run of two height chains on one domain; returns the number of
// times the ordering h1 <= h2 was violated (0 expected when it holds at start).
uint64_t coupled_height_run(HeightFunction& h1, HeightFunction& h2, uint64_t updates, uint64_t seed);
// Lowest and highest height functions with the canonical boundary values.
HeightFunction extreme_height(const LatticeDomain& domain, bool highest);

// Exhaustive DFS over columns; throws TooLarge above `limit` configurations.
std::vector<Columns> enumerate_configs(const PathBoundary& data, size_t limit = 1000000);

}  // namespace pk
