#include "diffeval/envs.hpp"
#include "diffeval/errors.hpp"
#include "diffeval/oracle.hpp"
#include "diffeval/training.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diffeval;
using diffeval::testing::random_problem;

namespace {

EvaluationProblem boyan_problem(double pi0, double mu0) {
  const BoyanChain chain = build_boyan({pi0, mu0});
  return EvaluationProblem::create(chain.mdp, chain.policy, boyan_d_mu(mu0), boyan_features());
}

TrainConfig gq1_config(std::int64_t steps) {
  TrainConfig cfg;
  cfg.algorithm = Algorithm::diff_gq1;
  cfg.step_sizes.alpha = StepSchedule::constant(0.0625);
  cfg.step_sizes.eta = 0.01;
  cfg.n_steps = steps;
  return cfg;
}

}  // namespace

TEST(Targets, BoyanExact) {
  const Targets t = exact_targets(boyan_problem(0.3, 0.5));
  ASSERT_TRUE(t.reward_rate.has_value());
  EXPECT_NEAR(*t.reward_rate, 1.7, 1e-12);
  EXPECT_EQ(t.q_pi->size(), 26);
}

TEST(Run, ZeroStepsRecordsInitialOnly) {
  const RunResult r = run(boyan_problem(0.5, 0.5), gq1_config(0));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].step, 0);
  EXPECT_EQ(r.records[0].r_hat, 0.0);
  EXPECT_DOUBLE_EQ(r.records[0].r_err, 1.5);
  EXPECT_TRUE(std::isfinite(r.records[0].value_err));
}

TEST(Run, DeterministicInSeed) {
  const EvaluationProblem p = boyan_problem(0.5, 0.5);
  TrainConfig cfg = gq1_config(2000);
  cfg.seed = 9;
  const RunResult a = run(p, cfg);
  const RunResult b = run(p, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].r_hat, b.records[i].r_hat);
    EXPECT_EQ(a.records[i].value_err, b.records[i].value_err);
  }
  cfg.seed = 10;
  EXPECT_NE(run(p, cfg).records.back().r_hat, a.records.back().r_hat);
}

TEST(Run, CheckpointsAndRecentAverage) {
  const EvaluationProblem p = boyan_problem(0.5, 0.5);
  TrainConfig cfg = gq1_config(1000);
  cfg.metrics_every = 250;
  const RunResult r = run(p, cfg);
  ASSERT_EQ(r.records.size(), 5u);
  for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].step, 250 * i);
  for (const auto& rec : r.records) EXPECT_NEAR(rec.r_err, std::abs(rec.r_bar_100 - 1.5), 1e-15);

  // r_bar_100 is the mean of the most recent 100 r_hat values.
  cfg.n_steps = 100;
  cfg.metrics_every = 1;
  const RunResult dense = run(p, cfg);
  double sum = 0.0;
  for (std::size_t i = 1; i < dense.records.size(); ++i) sum += dense.records[i].r_hat;
  EXPECT_NEAR(dense.records.back().r_bar_100, sum / 100.0, 1e-12);
}

TEST(Run, TwoSampleVariantAdvancesByTwo) {
  const EvaluationProblem p = boyan_problem(0.5, 0.5);
  TrainConfig cfg = gq1_config(1001);
  cfg.algorithm = Algorithm::diff_gq2;
  cfg.metrics_every = 100;
  const RunResult r = run(p, cfg);
  EXPECT_EQ(r.final_state.step_count, 1000);
  for (const auto& rec : r.records) EXPECT_EQ(rec.step % 2, 0);
  EXPECT_EQ(r.records.size(), 11u);
}

TEST(Run, NonFiniteCarriesConfiguration) {
  const EvaluationProblem p = boyan_problem(0.5, 0.5);
  TrainConfig cfg = gq1_config(5000);
  cfg.algorithm = Algorithm::diff_sgq;
  cfg.step_sizes.alpha = StepSchedule::constant(1e6);
  cfg.seed = 3;
  try {
    run(p, cfg);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("diff-sgq"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("seed 3"), std::string::npos);
  }
}

TEST(Run, RejectsBadArguments) {
  TrainConfig cfg = gq1_config(-1);
  EXPECT_THROW(run(boyan_problem(0.5, 0.5), cfg), InvalidArgument);
  cfg.n_steps = 10;
  cfg.metrics_every = 0;
  EXPECT_THROW(run(boyan_problem(0.5, 0.5), cfg), InvalidArgument);
}

TEST(Run, BoyanGq1ReachesRewardRate) {
  const EvaluationProblem p = boyan_problem(0.5, 0.5);
  TrainConfig cfg = gq1_config(5000);
  cfg.step_sizes.alpha = StepSchedule::constant(0.03125);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    total += run(p, cfg).records.back().r_err;
  }
  EXPECT_LT(total / 10.0, 0.1);
}

TEST(Run, WarmStartFromInit) {
  const EvaluationProblem p = random_problem(6, 2, 0.1, 1);
  TrainConfig cfg = gq1_config(0);
  LearnerState init = initial_state(Algorithm::diff_gq1, 2);
  init.r_hat = 0.4;
  cfg.init = init;
  EXPECT_EQ(run(p, cfg).records.front().r_hat, 0.4);
}
