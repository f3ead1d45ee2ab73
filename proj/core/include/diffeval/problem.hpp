#pragma once

#include "diffeval/features.hpp"
#include "diffeval/linalg.hpp"
#include "diffeval/mdp.hpp"
#include "diffeval/sampling.hpp"

namespace diffeval {

/// Everything the closed-form oracle needs: model, target policy, sampling
/// marginal d_mu and features, plus the derived P_pi and reward vector.
struct EvaluationProblem {
  Mdp mdp;
  Policy policy;
  Vector d_mu;
  FeatureMap features;
  Matrix p_pi;
  Vector reward;

  static EvaluationProblem create(Mdp mdp, Policy policy, Vector d_mu, FeatureMap features);

  EvaluationProblem with_features(FeatureMap fm) const;

  int n_pairs() const { return mdp.n_pairs(); }
  int n_features() const { return features.n_features(); }

  SamplingDistribution sampler() const { return SamplingDistribution(mdp, policy, d_mu); }
};

}  // namespace diffeval
