#include "diffeval/problem.hpp"

#include "diffeval/errors.hpp"

namespace diffeval {

EvaluationProblem EvaluationProblem::create(Mdp mdp, Policy policy, Vector d_mu,
                                            FeatureMap features) {
  if (d_mu.size() != mdp.n_pairs()) {
    throw InvalidArgument("EvaluationProblem: d_mu has the wrong length");
  }
  if (features.n_pairs() != mdp.n_pairs()) {
    throw InvalidArgument("EvaluationProblem: feature rows must match |S||A|");
  }
  Matrix p = transition_matrix(mdp, policy);
  Vector r = mdp.reward_vector();
  return EvaluationProblem{std::move(mdp), std::move(policy), std::move(d_mu),
                           std::move(features), std::move(p), std::move(r)};
}

EvaluationProblem EvaluationProblem::with_features(FeatureMap fm) const {
  if (fm.n_pairs() != n_pairs()) {
    throw InvalidArgument("EvaluationProblem: feature rows must match |S||A|");
  }
  EvaluationProblem copy = *this;
  copy.features = std::move(fm);
  return copy;
}

}  // namespace diffeval
