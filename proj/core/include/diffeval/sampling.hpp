#pragma once

#include "diffeval/linalg.hpp"
#include "diffeval/mdp.hpp"
#include "diffeval/rng.hpp"

#include <utility>
#include <vector>

namespace diffeval {

/// One draw (S, A, R, S', A') together with the flattened pair indices.
struct SampleTuple {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
  int a_next = 0;
  int pair = 0;
  int next_pair = 0;
};

/// The i.i.d. tuple distribution: (S, A) ~ d_mu, S' ~ p(. | S, A),
/// A' ~ pi(. | S'), R = r(S, A). Immutable; each worker brings its own Rng.
class SamplingDistribution {
 public:
  /// Throws AssumptionViolation("A2 ...") unless d_mu is strictly positive and
  /// sums to 1 within 1e-12.
  SamplingDistribution(Mdp mdp, Policy pi, Vector d_mu);

  SampleTuple draw(Rng& rng) const;
  std::pair<SampleTuple, SampleTuple> draw_pair(Rng& rng) const;

  const Vector& d_mu() const { return d_mu_; }
  const Mdp& mdp() const { return mdp_; }
  const Policy& policy() const { return pi_; }

 private:
  Mdp mdp_;
  Policy pi_;
  Vector d_mu_;
  std::vector<double> pair_cdf_;
  RowMatrix next_state_cdf_;
  RowMatrix action_cdf_;
};

/// d_mu(s_i, a0) = mu0 / 13 and d_mu(s_i, a1) = (1 - mu0) / 13 over the
/// Boyan chain with target pi(a0 | .) = pi0. Requires 0 < mu0 < 1.
SamplingDistribution boyan_sampling(double mu0, double pi0);

/// d_mu for the Boyan chain without building the sampler.
Vector boyan_d_mu(double mu0);

}  // namespace diffeval
