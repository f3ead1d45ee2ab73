#pragma once

#include "diffeval/features.hpp"
#include "diffeval/linalg.hpp"
#include "diffeval/mdp.hpp"
#include "diffeval/rng.hpp"

#include <cstdint>
#include <optional>

namespace diffeval {

struct BoyanChainSpec {
  double pi0 = 0.5;  ///< pi(a0 | s) for every state, in [0, 1]
  double mu0 = 0.5;  ///< sampling mass on a0, in (0, 1)
};

struct BoyanChain {
  Mdp mdp;
  Policy policy;
};

/// 13 states, 2 actions. r(., a0) = 1, r(., a1) = 2. From s_i with i >= 2,
/// a0 moves to s_{i-2} and a1 to s_{i-1}; s_1 moves to s_0 under both actions;
/// s_0 resets uniformly over all 13 states.
BoyanChain build_boyan(const BoyanChainSpec& spec);

/// Expected-update system u <- u + alpha (A u + b) of the divergence example.
struct ExpectedUpdateSystem {
  Matrix a;
  Vector b;
};

/// A = [[-1, 6], [-2, 6]] with b = 0.
ExpectedUpdateSystem build_counterexample();

/// A concrete 2-state, 1-action instance whose assembled A equals the
/// counterexample matrix exactly: P = [[1/3, 2/3], [0, 1]], X = [1; 11],
/// d_mu = (0.9, 0.1), zero reward.
struct CounterexampleInstance {
  Mdp mdp;
  Policy policy;
  Vector d_mu;
  FeatureMap features;
};
CounterexampleInstance counterexample_instance();

struct RandomMdpSpec {
  int n_pairs = 10;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  /// Fixed feature count; when unset K is uniform on {1, ..., max_features}.
  std::optional<int> num_features;
  /// Upper end of the uniform K draw; defaults to n_pairs.
  std::optional<int> max_features;
  /// Replaces the Uniform[0, 1) rewards with a constant.
  std::optional<double> constant_reward;
};

/// Random instance represented as an n_pairs-state, single-action chain
/// whose transition matrix is P_pi.
struct RandomInstance {
  Mdp mdp;
  Policy policy;
  Vector d_pi;
  Vector d_mu;
  FeatureMap features;
};

/// Rows of P_pi uniform on the simplex; d_pi its stationary distribution;
/// d_mu = d_pi + N(0, sigma^2) noise, renormalized, with a softmax fallback
/// when the result leaves the open simplex; X i.i.d. standard normal.
RandomInstance random_mdp(const RandomMdpSpec& spec, Rng& rng);
RandomInstance random_mdp(const RandomMdpSpec& spec);

/// Perturbs `d_pi` the same way random_mdp does.
Vector perturb_distribution(const Vector& d_pi, double sigma, Rng& rng);

}  // namespace diffeval
