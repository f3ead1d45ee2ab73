#include "diffeval/envs.hpp"
#include "diffeval/errors.hpp"
#include "diffeval/mdp.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace diffeval;

namespace {

Mdp cycle_mdp(double r0, double r1) {
  Matrix r(2, 1);
  r << r0, r1;
  Matrix p(2, 2);
  p << 0.0, 1.0, 1.0, 0.0;
  return Mdp(r, p);
}

Policy single_action(int n_states) { return Policy(Matrix::Ones(n_states, 1)); }

// P_pi assembled pair by pair from the Boyan chain's description.
Matrix boyan_kernel_by_hand(double pi0) {
  const int n = kBoyanStates;
  Matrix p = Matrix::Zero(2 * n, 2 * n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int s2 = 0; s2 < n; ++s2) {
        double ps = 0.0;
        if (s == 0) {
          ps = 1.0 / n;
        } else if (s == 1) {
          ps = s2 == 0 ? 1.0 : 0.0;
        } else {
          ps = s2 == s - 2 + a ? 1.0 : 0.0;
        }
        p(2 * s + a, 2 * s2) = ps * pi0;
        p(2 * s + a, 2 * s2 + 1) = ps * (1.0 - pi0);
      }
    }
  }
  return p;
}

}  // namespace

TEST(Mdp, RejectsMalformedInput) {
  Matrix r(2, 1);
  r << 0.0, 1.0;
  Matrix bad(2, 2);
  bad << 0.5, 0.4, 0.0, 1.0;
  EXPECT_THROW(Mdp(r, bad), InvalidArgument);
  Matrix negative(2, 2);
  negative << 1.5, -0.5, 0.0, 1.0;
  EXPECT_THROW(Mdp(r, negative), InvalidArgument);
  EXPECT_THROW(Mdp(r, Matrix::Ones(3, 2) / 2.0), InvalidArgument);
  Matrix bad_pi(1, 2);
  bad_pi << 0.7, 0.7;
  EXPECT_THROW(Policy{bad_pi}, InvalidArgument);
}

TEST(TransitionMatrix, SingleStateIsOne) {
  const Mdp mdp(Matrix::Constant(1, 1, 3.0), Matrix::Ones(1, 1));
  const Matrix p = transition_matrix(mdp, single_action(1));
  ASSERT_EQ(p.rows(), 1);
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
}

TEST(TransitionMatrix, TwoStateCycleIsPermutation) {
  const Matrix p = transition_matrix(cycle_mdp(0.0, 1.0), single_action(2));
  Matrix expected(2, 2);
  expected << 0.0, 1.0, 1.0, 0.0;
  EXPECT_EQ(p, expected);
}

TEST(TransitionMatrix, BoyanMatchesLoopBuilder) {
  for (double pi0 : {0.1, 0.5, 0.9}) {
    const BoyanChain chain = build_boyan({pi0, 0.5});
    const Matrix p = transition_matrix(chain.mdp, chain.policy);
    EXPECT_LT((p - boyan_kernel_by_hand(pi0)).cwiseAbs().maxCoeff(), 1e-15) << pi0;
  }
  const BoyanChain chain = build_boyan({0.5, 0.5});
  const Matrix p = transition_matrix(chain.mdp, chain.policy);
  for (int j = 0; j < p.cols(); ++j) EXPECT_DOUBLE_EQ(p(0, j), 1.0 / 26.0);
}

TEST(Stationary, CycleAndSingleton) {
  Matrix cyc(2, 2);
  cyc << 0.0, 1.0, 1.0, 0.0;
  const Vector d = stationary_sa_distribution(cyc);
  EXPECT_NEAR(d(0), 0.5, 1e-12);
  EXPECT_NEAR(d(1), 0.5, 1e-12);
  EXPECT_NEAR(stationary_sa_distribution(Matrix::Ones(1, 1))(0), 1.0, 1e-15);
}

TEST(Stationary, BoyanAgreesWithPowerIteration) {
  const BoyanChain chain = build_boyan({0.5, 0.5});
  const Matrix p = transition_matrix(chain.mdp, chain.policy);
  const Vector d = stationary_sa_distribution(p);
  Vector v = Vector::Constant(p.rows(), 1.0 / p.rows());
  for (int i = 0; i < 20000; ++i) v = 0.5 * (v + p.transpose() * v);
  EXPECT_LT((d - v).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(d.sum(), 1.0, 1e-12);
  EXPECT_GE(d.minCoeff(), 0.0);
}

TEST(Stationary, MultichainThrowsNamedAssumption) {
  const Matrix loops = Matrix::Identity(2, 2);
  try {
    stationary_sa_distribution(loops);
    FAIL() << "expected AssumptionViolation";
  } catch (const AssumptionViolation& e) {
    EXPECT_EQ(e.assumption(), "A1 unichain");
  }
}

TEST(RewardRate, ConstantAndCycle) {
  Matrix r = Matrix::Constant(3, 2, 2.5);
  Matrix p = Matrix::Constant(6, 3, 1.0 / 3.0);
  const Policy pi = Policy::uniform_over_states(3, Eigen::Vector2d(0.3, 0.7));
  EXPECT_NEAR(reward_rate_exact(Mdp(r, p), pi), 2.5, 1e-12);
  EXPECT_NEAR(reward_rate_exact(cycle_mdp(0.0, 1.0), single_action(2)), 0.5, 1e-12);
}

TEST(RewardRate, BoyanIsTwoMinusPi0) {
  for (double pi0 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const BoyanChain chain = build_boyan({pi0, 0.5});
    EXPECT_NEAR(reward_rate_exact(chain.mdp, chain.policy), 2.0 - pi0, 1e-12) << pi0;
  }
}

TEST(DifferentialQ, TwoStateCycle) {
  const ExactSolution sol = differential_q_exact(cycle_mdp(0.0, 1.0), single_action(2));
  EXPECT_NEAR(sol.reward_rate, 0.5, 1e-12);
  EXPECT_NEAR(sol.diff_q(0), -0.25, 1e-12);
  EXPECT_NEAR(sol.diff_q(1), 0.25, 1e-12);
}

TEST(DifferentialQ, ConstantRewardGivesZero) {
  const Mdp mdp(Matrix::Constant(3, 2, -1.0), Matrix::Constant(6, 3, 1.0 / 3.0));
  const ExactSolution sol =
      differential_q_exact(mdp, Policy::uniform_over_states(3, Eigen::Vector2d(0.5, 0.5)));
  EXPECT_NEAR(sol.reward_rate, -1.0, 1e-12);
  EXPECT_LT(sol.diff_q.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DifferentialQ, BellmanResidualAndNormalization) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomMdpSpec spec;
    spec.n_pairs = 3 + static_cast<int>(seed % 17);
    spec.seed = seed;
    const RandomInstance inst = random_mdp(spec);
    const ExactSolution sol = differential_q_exact(inst.mdp, inst.policy);
    const Matrix p = transition_matrix(inst.mdp, inst.policy);
    EXPECT_LE(bellman_residual(p, inst.mdp.reward_vector(), sol.reward_rate, sol.diff_q), 1e-8);
    EXPECT_NEAR(sol.stationary_sa.dot(sol.diff_q), 0.0, 1e-10);
  }
  const BoyanChain chain = build_boyan({0.3, 0.5});
  const ExactSolution sol = differential_q_exact(chain.mdp, chain.policy);
  EXPECT_LE(bellman_residual(transition_matrix(chain.mdp, chain.policy),
                             chain.mdp.reward_vector(), sol.reward_rate, sol.diff_q),
            1e-8);
}

TEST(Unichain, Diagnostics) {
  Matrix cyc(2, 2);
  cyc << 0.0, 1.0, 1.0, 0.0;
  EXPECT_TRUE(is_unichain(cyc));
  const UnichainDiagnostic loops = is_unichain(Matrix::Identity(2, 2));
  EXPECT_FALSE(loops);
  EXPECT_EQ(loops.recurrent_classes, 2);
  Matrix transient(3, 3);
  transient << 0.0, 0.5, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
  EXPECT_FALSE(is_unichain(transient));
  Matrix absorbing(2, 2);
  absorbing << 0.5, 0.5, 0.0, 1.0;
  const UnichainDiagnostic one = is_unichain(absorbing);
  EXPECT_TRUE(one);
  EXPECT_EQ(one.transient_pairs, 1);
  const BoyanChain chain = build_boyan({0.5, 0.5});
  EXPECT_TRUE(is_unichain(chain.mdp, chain.policy));
}
