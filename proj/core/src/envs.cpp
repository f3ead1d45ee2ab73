#include "diffeval/envs.hpp"

#include "diffeval/errors.hpp"

#include <cmath>

namespace diffeval {

BoyanChain build_boyan(const BoyanChainSpec& spec) {
  if (!(spec.pi0 >= 0.0 && spec.pi0 <= 1.0)) {
    throw InvalidArgument("build_boyan: pi0 must lie in [0, 1]");
  }
  constexpr int kActions = 2;
  Matrix reward(kBoyanStates, kActions);
  reward.col(0).setConstant(1.0);
  reward.col(1).setConstant(2.0);

  Matrix transition = Matrix::Zero(kBoyanStates * kActions, kBoyanStates);
  for (int a = 0; a < kActions; ++a) {
    transition.row(a).setConstant(1.0 / kBoyanStates);
    transition(1 * kActions + a, 0) = 1.0;
  }
  for (int s = 2; s < kBoyanStates; ++s) {
    transition(s * kActions + 0, s - 2) = 1.0;
    transition(s * kActions + 1, s - 1) = 1.0;
  }

  Vector action_probs(kActions);
  action_probs << spec.pi0, 1.0 - spec.pi0;
  return BoyanChain{Mdp(std::move(reward), std::move(transition)),
                    Policy::uniform_over_states(kBoyanStates, action_probs)};
}

ExpectedUpdateSystem build_counterexample() {
  ExpectedUpdateSystem sys{Matrix(2, 2), Vector::Zero(2)};
  sys.a << -1.0, 6.0, -2.0, 6.0;
  return sys;
}

CounterexampleInstance counterexample_instance() {
  Matrix transition(2, 2);
  transition << 1.0 / 3.0, 2.0 / 3.0, 0.0, 1.0;
  Matrix x(2, 1);
  x << 1.0, 11.0;
  Vector d_mu(2);
  d_mu << 0.9, 0.1;
  return CounterexampleInstance{Mdp(Matrix::Zero(2, 1), std::move(transition)),
                                Policy(Matrix::Ones(2, 1)), std::move(d_mu),
                                FeatureMap(std::move(x))};
}

Vector perturb_distribution(const Vector& d_pi, double sigma, Rng& rng) {
  Vector d = d_pi;
  if (sigma > 0.0) {
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      d(i) += sigma * rng.normal();
    }
  }
  d /= d.sum();
  const bool in_simplex = d.allFinite() && (d.array() > 0.0).all();
  if (in_simplex) {
    return d;
  }
  if (!d.allFinite()) {
    d = d_pi;
  }
  const Eigen::ArrayXd e = (d.array() - d.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

RandomInstance random_mdp(const RandomMdpSpec& spec, Rng& rng) {
  const int n = spec.n_pairs;
  if (n < 1) {
    throw InvalidArgument("random_mdp: n_pairs must be positive");
  }
  if (!(spec.sigma >= 0.0)) {
    throw InvalidArgument("random_mdp: sigma must be nonnegative");
  }

  Matrix p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      p(i, j) = rng.exponential();
    }
    p.row(i) /= p.row(i).sum();
  }
  const Vector d_pi = stationary_sa_distribution(p);
  Vector d_mu = perturb_distribution(d_pi, spec.sigma, rng);

  int k = 0;
  if (spec.num_features) {
    k = *spec.num_features;
  } else {
    const int hi = spec.max_features ? std::min(*spec.max_features, n) : n;
    k = static_cast<int>(rng.uniform_int(1, hi));
  }
  FeatureMap features = random_features(n, k, rng);

  Matrix reward(n, 1);
  for (int i = 0; i < n; ++i) {
    reward(i, 0) = rng.uniform();
  }
  if (spec.constant_reward) {
    reward.setConstant(*spec.constant_reward);
  }

  return RandomInstance{Mdp(std::move(reward), std::move(p)), Policy(Matrix::Ones(n, 1)), d_pi,
                        std::move(d_mu), std::move(features)};
}

RandomInstance random_mdp(const RandomMdpSpec& spec) {
  Rng rng(spec.seed);
  return random_mdp(spec, rng);
}

}  // namespace diffeval
