#pragma once
// Non-intersecting Bernoulli random walks: the one-step transition law, an
// exact one-step sampler, trajectories, quantile initial data and the Pearcey
// rescaling maps.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "pk/density.hpp"
#include "pk/lattice.hpp"

namespace pk {

// P(y | x) = (1-b)^k prod (b/(1-b))^{y_i-x_i} prod_{i<j} (y_i-y_j)/(x_i-x_j)
// when every y_i - x_i is 0 or 1, else 0. Throws LabelMismatch.
double transition_weight(const ParticleConfig& x, const ParticleConfig& y, double beta);
// Natural log of the above (-inf for weight 0).
double log_transition_weight(const ParticleConfig& x, const ParticleConfig& y, double beta);

struct NbrwChain {
  ParticleConfig config;
  double beta = 0.5;
  int64_t step_index = 0;
  std::mt19937_64 rng;
};
NbrwChain make_chain(ParticleConfig initial, double beta, uint64_t seed);

// Draws y ~ P(. | chain.config) exactly, advances the chain and returns y.
ParticleConfig step_exact(NbrwChain& chain);

// Sequential-conditioning oracle: P(e_j = 1 | e_0..e_{j-1}) for the branch
// vector e (index j = label + M), computed as a ratio of multilinear
// determinants in the given polynomial basis.
enum class PolyBasis { Monomial, FallingFactorial };
double conditional_jump_probability(const ParticleConfig& x, double beta, const std::vector<int>& prefix,
                                    PolyBasis basis);

// T + 1 configurations starting from `initial`.
std::vector<ParticleConfig> simulate(const ParticleConfig& initial, double beta, int64_t T, uint64_t seed);

// d_i = round(n gamma_i), gamma_0 = E_+, int_{E_+}^{gamma_i} rho = i/n and
// int_{gamma_{-i}}^{E_-} rho = i/n; collisions pushed right. Throws
// InsufficientMass.
ParticleConfig quantile_initial(const DensityProfile& rho, int64_t n, int64_t M, int64_t N);
// The unrounded gamma_i, i = -M..N.
std::vector<double> quantiles(const DensityProfile& rho, int64_t n, int64_t M, int64_t N);

struct PearceyFrame {
  int64_t n = 0;
  double x_c = 0, t_c = 0, A = 1, B = 0.5;
};
void validate_frame(const PearceyFrame& f);

// floor(n t_c - 2 A^{1/2} B (1-B) n^{1/2} tau).
int64_t pearcey_time(const PearceyFrame& f, double tau);
// Positions at that time mapped to (a - n x_c) / (sqrt2 A^{1/4} B(1-B) n^{1/4})
// + sqrt2 A^{1/4} B n^{1/4} tau. Throws HorizonExceeded.
std::vector<std::vector<double>> rescale_pearcey(const std::vector<ParticleConfig>& trajectory,
                                                 const PearceyFrame& frame, const std::vector<double>& taus);

// The (r, q) form: time floor(n t_c - sqrt(r-1) n^{1/2} t / (r q)), positions
// (a - n x_c + sqrt(r-1) n^{1/2} t / (r^2 q)) sqrt(q r^3) / ((r-1)^{3/4} n^{1/4}).
int64_t tiling_time(double r, double q, double t_c, int64_t n, double t);
std::vector<std::vector<double>> rescale_tiling(const std::vector<ParticleConfig>& trajectory, double r, double q,
                                                double x_c, double t_c, int64_t n, const std::vector<double>& times);

// Default horizon ceil(1.2 n t_c).
int64_t default_horizon(double t_c, int64_t n);

// CSV rows "step,label,position".
void write_trajectory_csv(std::ostream& os, const std::vector<ParticleConfig>& trajectory);

}  // namespace pk
