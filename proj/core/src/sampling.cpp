#include "diffeval/sampling.hpp"

#include "diffeval/envs.hpp"
#include "diffeval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diffeval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cumulative sums over a fixed ordering; every entry from the last positive
// weight onward is +inf so a uniform draw in [0, 1) always lands on a
// positive-probability index.
template <typename Row>
void fill_cdf(const Row& weights, double* out) {
  const Eigen::Index n = weights.size();
  Eigen::Index last_positive = 0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += weights(i);
    out[i] = acc;
    if (weights(i) > 0.0) {
      last_positive = i;
    }
  }
  for (Eigen::Index i = last_positive; i < n; ++i) {
    out[i] = kInf;
  }
}

int inverse_cdf(const double* cdf, int n, double u) {
  return static_cast<int>(std::upper_bound(cdf, cdf + n, u) - cdf);
}

}  // namespace

SamplingDistribution::SamplingDistribution(Mdp mdp, Policy pi, Vector d_mu)
    : mdp_(std::move(mdp)), pi_(std::move(pi)), d_mu_(std::move(d_mu)) {
  if (pi_.n_states() != mdp_.n_states() || pi_.n_actions() != mdp_.n_actions()) {
    throw InvalidArgument("SamplingDistribution: policy shape does not match the MDP");
  }
  if (d_mu_.size() != mdp_.n_pairs()) {
    throw InvalidArgument("SamplingDistribution: d_mu has the wrong length");
  }
  if (!d_mu_.allFinite() || (d_mu_.array() <= 0.0).any()) {
    throw AssumptionViolation("A2 positive d_mu", "every state-action pair needs d_mu > 0");
  }
  if (std::abs(d_mu_.sum() - 1.0) > 1e-12) {
    throw AssumptionViolation("A2 positive d_mu", "d_mu does not sum to 1");
  }

  pair_cdf_.resize(static_cast<std::size_t>(mdp_.n_pairs()));
  fill_cdf(d_mu_, pair_cdf_.data());

  next_state_cdf_.resize(mdp_.n_pairs(), mdp_.n_states());
  for (int p = 0; p < mdp_.n_pairs(); ++p) {
    fill_cdf(mdp_.transition().row(p), next_state_cdf_.row(p).data());
  }
  action_cdf_.resize(mdp_.n_states(), mdp_.n_actions());
  for (int s = 0; s < mdp_.n_states(); ++s) {
    fill_cdf(pi_.probs().row(s), action_cdf_.row(s).data());
  }
}

SampleTuple SamplingDistribution::draw(Rng& rng) const {
  const int n_actions = mdp_.n_actions();
  SampleTuple t;
  t.pair = inverse_cdf(pair_cdf_.data(), mdp_.n_pairs(), rng.uniform());
  t.s = t.pair / n_actions;
  t.a = t.pair % n_actions;
  t.r = mdp_.reward(t.s, t.a);
  t.s_next = inverse_cdf(next_state_cdf_.row(t.pair).data(), mdp_.n_states(), rng.uniform());
  t.a_next = inverse_cdf(action_cdf_.row(t.s_next).data(), n_actions, rng.uniform());
  t.next_pair = t.s_next * n_actions + t.a_next;
  return t;
}

std::pair<SampleTuple, SampleTuple> SamplingDistribution::draw_pair(Rng& rng) const {
  SampleTuple first = draw(rng);
  SampleTuple second = draw(rng);
  return {first, second};
}

Vector boyan_d_mu(double mu0) {
  if (!(mu0 > 0.0 && mu0 < 1.0)) {
    throw AssumptionViolation("A2 positive d_mu", "Boyan sampling needs 0 < mu0 < 1");
  }
  Vector d(2 * kBoyanStates);
  for (int s = 0; s < kBoyanStates; ++s) {
    d(2 * s) = mu0 / kBoyanStates;
    d(2 * s + 1) = (1.0 - mu0) / kBoyanStates;
  }
  return d;
}

SamplingDistribution boyan_sampling(double mu0, double pi0) {
  Vector d = boyan_d_mu(mu0);
  auto chain = build_boyan(BoyanChainSpec{pi0, mu0});
  return SamplingDistribution(std::move(chain.mdp), std::move(chain.policy), std::move(d));
}

}  // namespace diffeval
