#include "diffeval/envs.hpp"
#include "diffeval/errors.hpp"
#include "diffeval/learners.hpp"
#include "diffeval/oracle.hpp"
#include "diffeval/training.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace diffeval;
using diffeval::testing::random_problem;
using diffeval::testing::tabular_problem;

namespace {

SampleTuple tuple(int pair, int next_pair, double r) {
  SampleTuple t;
  t.pair = pair;
  t.next_pair = next_pair;
  t.s = pair;
  t.s_next = next_pair;
  t.r = r;
  return t;
}

FeatureMap small_features() {
  Matrix x(3, 2);
  x << 1.0, 2.0, -0.5, 0.25, 3.0, -1.0;
  return FeatureMap(x);
}

Vector random_vector(int n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

// Packs the expected-update coordinates kappa = [nu; primal].
using Pack = std::function<Vector(const LearnerState&)>;
using Update = std::function<LearnerState(const LearnerState&, Rng&)>;

// Monte-Carlo mean of single-sample increments (alpha = 1) against G kappa + h.
void check_expected_update(const ExpectedUpdate& eu, const LearnerState& at, const Pack& pack,
                           const Update& update, std::uint64_t seed) {
  Rng rng(seed);
  const Vector kappa = pack(at);
  const Vector expected = eu.g * kappa + eu.h;
  constexpr int n = 100000;
  Vector sum = Vector::Zero(kappa.size()), sq = Vector::Zero(kappa.size());
  for (int i = 0; i < n; ++i) {
    const Vector inc = pack(update(at, rng)) - kappa;
    sum += inc;
    sq += inc.cwiseAbs2();
  }
  const Vector mean = sum / n;
  const Vector se = ((sq / n - mean.cwiseAbs2()) / n).cwiseMax(0.0).cwiseSqrt();
  for (int i = 0; i < kappa.size(); ++i) {
    EXPECT_LE(std::abs(mean(i) - expected(i)), 4.0 * se(i) + 1e-12) << "coordinate " << i;
  }
}

}  // namespace

TEST(Algorithms, NamesRoundTrip) {
  for (Algorithm a : all_algorithms()) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_EQ(to_string(Algorithm::gradient_dice), "gradient-dice");
  EXPECT_THROW(parse_algorithm("diff-gq9"), InvalidArgument);
  EXPECT_EQ(samples_per_update(Algorithm::diff_gq2), 2);
  EXPECT_EQ(samples_per_update(Algorithm::projected_gq2), 2);
  EXPECT_EQ(samples_per_update(Algorithm::diff_gq1), 1);
}

TEST(Algorithms, InitialStateShapes) {
  EXPECT_EQ(initial_state(Algorithm::diff_gq1, 3).nu.size(), 4);
  EXPECT_EQ(initial_state(Algorithm::diff_gq2, 3).nu.size(), 3);
  EXPECT_EQ(initial_state(Algorithm::diff_gq3, 3).nu.size(), 3);
  EXPECT_EQ(initial_state(Algorithm::gradient_dice, 3).tau_weights.size(), 3);
  EXPECT_EQ(initial_state(Algorithm::projected_gq2, 3).w_bar.size(), 3);
  EXPECT_THROW(initial_state(Algorithm::diff_gq1, 0), InvalidArgument);
}

TEST(StepSchedule, Values) {
  EXPECT_EQ(StepSchedule::constant(0.25)(1000), 0.25);
  EXPECT_NEAR(StepSchedule::polynomial(0.5, 0.7)(0), 0.5, 1e-15);
  EXPECT_NEAR(StepSchedule::polynomial(0.5, 0.7)(9), 0.5 / std::pow(10.0, 0.7), 1e-15);
}

TEST(DiffSgq, ZeroInit) {
  const FeatureMap fm = small_features();
  const LearnerState s =
      diff_sgq_step(initial_state(Algorithm::diff_sgq, 2), tuple(0, 1, 1.0), fm, 0.1);
  EXPECT_NEAR(s.r_hat, 0.1, 1e-15);
  EXPECT_LT((s.w - 0.1 * Vector(fm.x_row(0))).norm(), 1e-15);
  EXPECT_EQ(s.step_count, 1);
}

TEST(DiffSgq, ExpectedUpdateVanishesAtTdFixedPoint) {
  const EvaluationProblem p = random_problem(8, 2, 0.1, 3);
  const FixedPointMatrices m = assemble(p);
  const TdFixedPoint td = td_fixed_point(m);
  ASSERT_EQ(td.kind, FixedPointKind::unique);
  LearnerState at = initial_state(Algorithm::diff_sgq, 2);
  at.r_hat = td.u(0);
  at.w = td.u.tail(2);
  ExpectedUpdate zero;
  zero.g = Matrix::Zero(3, 3);
  zero.h = Vector::Zero(3);
  const SamplingDistribution s = p.sampler();
  check_expected_update(
      zero, at,
      [](const LearnerState& st) {
        Vector v(3);
        v << st.r_hat, st.w;
        return v;
      },
      [&](const LearnerState& st, Rng& rng) {
        return diff_sgq_step(st, s.draw(rng), p.features, 1.0);
      },
      11);
}

TEST(DiffSgq, NonFiniteIsTrapped) {
  const FeatureMap fm = small_features();
  LearnerState s = initial_state(Algorithm::diff_sgq, 2);
  s.w(0) = 1e308;
  try {
    diff_sgq_step(s, tuple(2, 0, 0.0), fm, 10.0);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.algorithm(), "diff-sgq");
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(DiffGq1, ZeroInit) {
  const FeatureMap fm = small_features();
  const LearnerState s =
      diff_gq1_step(initial_state(Algorithm::diff_gq1, 2), tuple(0, 2, 2.0), fm, 0.1, 0.01);
  EXPECT_EQ(s.r_hat, 0.0);
  EXPECT_EQ(s.w, Vector::Zero(2));
  EXPECT_LT((s.nu - 0.2 * Vector(fm.y_row(0))).norm(), 1e-15);
}

TEST(DiffGq1, MonteCarloMatchesExpectedUpdate) {
  const EvaluationProblem p = random_problem(7, 2, 0.1, 13);
  const FixedPointMatrices m = assemble(p);
  const SamplingDistribution s = p.sampler();
  const double eta = 0.05;
  const ExpectedUpdate eu = expected_update_gq1(m, eta);
  Rng pts(1);
  for (int point = 0; point < 10; ++point) {
    LearnerState at = initial_state(Algorithm::diff_gq1, 2);
    at.r_hat = pts.normal();
    at.w = random_vector(2, pts);
    at.nu = random_vector(3, pts);
    check_expected_update(
        eu, at,
        [](const LearnerState& st) {
          Vector v(6);
          v << st.nu, st.r_hat, st.w;
          return v;
        },
        [&](const LearnerState& st, Rng& rng) {
          return diff_gq1_step(st, s.draw(rng), p.features, 1.0, eta);
        },
        100 + point);
  }
}

TEST(DiffGq1, ExpectedUpdateIsSaddleGradientFlow) {
  const EvaluationProblem p = random_problem(9, 3, 0.1, 17);
  const FixedPointMatrices m = assemble(p);
  const double eta = 0.1;
  const ExpectedUpdate eu = expected_update_gq1(m, eta);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector u = random_vector(4, rng), nu = random_vector(4, rng);
    Vector kappa(8);
    kappa << nu, u;
    const Vector dir = eu.g * kappa + eu.h;
    const auto fd = [&](bool dual, int i) {
      const double h = 1e-5;
      Vector up = dual ? nu : u, dn = up;
      up(i) += h;
      dn(i) -= h;
      const double fp = dual ? j1_saddle(m, u, up, eta) : j1_saddle(m, up, nu, eta);
      const double fm = dual ? j1_saddle(m, u, dn, eta) : j1_saddle(m, dn, nu, eta);
      return (fp - fm) / (2 * h);
    };
    for (int i = 0; i < 4; ++i) {
      const double gd = 0.5 * fd(true, i);
      const double gp = -0.5 * fd(false, i);
      EXPECT_LE(std::abs(dir(i) - gd), 1e-5 * std::max(1.0, std::abs(gd)));
      EXPECT_LE(std::abs(dir(4 + i) - gp), 1e-5 * std::max(1.0, std::abs(gp)));
    }
  }
}

TEST(DiffGq2, ZeroInit) {
  const FeatureMap fm = small_features();
  const LearnerState s = diff_gq2_step(initial_state(Algorithm::diff_gq2, 2), tuple(0, 1, 3.0),
                                       tuple(2, 0, 1.0), fm, 0.1, 0.2, 0.01);
  EXPECT_EQ(s.w, Vector::Zero(2));
  EXPECT_LT((s.nu - 0.1 * (3.0 - 1.0) * Vector(fm.x_row(0))).norm(), 1e-15);
  EXPECT_NEAR(s.r_hat, 0.2 * (3.0 + 1.0) / 2.0, 1e-15);
  EXPECT_EQ(s.step_count, 2);
}

TEST(DiffGq2, MonteCarloMatchesExpectedUpdate) {
  const EvaluationProblem p = random_problem(7, 3, 0.1, 19);
  const FixedPointMatrices m = assemble(p);
  const SamplingDistribution s = p.sampler();
  const double eta = 0.05;
  const ExpectedUpdate eu = expected_update_gq2(m, eta);
  Rng pts(2);
  for (int point = 0; point < 10; ++point) {
    LearnerState at = initial_state(Algorithm::diff_gq2, 3);
    at.w = random_vector(3, pts);
    at.nu = random_vector(3, pts);
    check_expected_update(
        eu, at,
        [](const LearnerState& st) {
          Vector v(6);
          v << st.nu, st.w;
          return v;
        },
        [&](const LearnerState& st, Rng& rng) {
          const auto [a, b] = s.draw_pair(rng);
          return diff_gq2_step(st, a, b, p.features, 1.0, 0.0, eta);
        },
        200 + point);
  }
}

TEST(DiffGq2, RewardRateTracksConstantReward) {
  RandomMdpSpec spec;
  spec.n_pairs = 8;
  spec.sigma = 0.1;
  spec.seed = 6;
  spec.num_features = 2;
  spec.constant_reward = 0.7;
  RandomInstance inst = random_mdp(spec);
  const EvaluationProblem p =
      EvaluationProblem::create(inst.mdp, inst.policy, inst.d_mu, inst.features);
  TrainConfig cfg;
  cfg.algorithm = Algorithm::diff_gq2;
  cfg.step_sizes.alpha = StepSchedule::constant(0.01);
  cfg.step_sizes.eta = 0.01;
  cfg.n_steps = 40000;
  cfg.metrics_every = 40000;
  const RunResult r = run(p, cfg);
  EXPECT_NEAR(r.final_state.r_hat, 0.7, 0.02);
}

TEST(DiffGq3, ZeroInit) {
  const FeatureMap fm = small_features();
  const LearnerState s =
      diff_gq3_step(initial_state(Algorithm::diff_gq3, 2), tuple(1, 2, 2.0), fm, 0.1, 0.01);
  EXPECT_EQ(s.r_hat, 0.0);
  EXPECT_EQ(s.w, Vector::Zero(2));
  EXPECT_LT((s.nu - 0.2 * Vector(fm.x_row(1))).norm(), 1e-15);
}

TEST(DiffGq3, MonteCarloMatchesExpectedUpdate) {
  const EvaluationProblem p = random_problem(7, 2, 0.1, 23);
  const FixedPointMatrices m = assemble(p);
  const SamplingDistribution s = p.sampler();
  const double eta = 0.05;
  const ExpectedUpdate eu = expected_update_gq3(m, eta);
  Rng pts(3);
  for (int point = 0; point < 10; ++point) {
    LearnerState at = initial_state(Algorithm::diff_gq3, 2);
    at.r_hat = pts.normal();
    at.w = random_vector(2, pts);
    at.nu = random_vector(2, pts);
    check_expected_update(
        eu, at,
        [](const LearnerState& st) {
          Vector v(5);
          v << st.nu, st.r_hat, st.w;
          return v;
        },
        [&](const LearnerState& st, Rng& rng) {
          return diff_gq3_step(st, s.draw(rng), p.features, 1.0, eta);
        },
        300 + point);
  }
}

TEST(DiffGq4, ZeroInit) {
  const FeatureMap fm = small_features();
  const LearnerState s =
      diff_gq4_step(initial_state(Algorithm::diff_gq4, 2), tuple(2, 1, 1.5), fm, 0.1, 0.01);
  EXPECT_NEAR(s.r_hat, 0.15, 1e-15);
  EXPECT_LT((s.nu - 0.15 * Vector(fm.x_row(2))).norm(), 1e-15);
  EXPECT_EQ(s.w, Vector::Zero(2));
}

TEST(DiffGq4, LargeRidgeStaysBounded) {
  const EvaluationProblem p = random_problem(10, 3, 0.1, 5);
  TrainConfig cfg;
  cfg.algorithm = Algorithm::diff_gq4;
  cfg.step_sizes.alpha = StepSchedule::constant(0.01);
  cfg.step_sizes.eta = 10.0;
  cfg.n_steps = 100000;
  cfg.metrics_every = 10000;
  const RunResult r = run(p, cfg);
  for (const auto& rec : r.records) ASSERT_TRUE(std::isfinite(rec.r_hat));
  EXPECT_LT(r.final_state.w.norm(), 10.0);
  EXPECT_LT(std::abs(r.final_state.r_hat), 10.0);
}

TEST(GradientDice, ZeroInit) {
  const FeatureMap fm = small_features();
  const LearnerState s = gradient_dice_step(initial_state(Algorithm::gradient_dice, 2),
                                            tuple(0, 1, 5.0), fm, 0.1, 0.0, 0.0);
  EXPECT_EQ(s.r_hat, 0.0);
  EXPECT_EQ(s.dice_u, 0.0);
  EXPECT_EQ(s.tau_weights, Vector::Zero(2));
  const LearnerState t = gradient_dice_step(initial_state(Algorithm::gradient_dice, 2),
                                            tuple(0, 1, 5.0), fm, 0.1, 1.0, 0.0);
  EXPECT_NEAR(t.dice_u, -0.1, 1e-15);
}

TEST(GradientDice, OnPolicyTabularRatioIsOne) {
  const EvaluationProblem p = tabular_problem(5, 0.0, 2);
  TrainConfig cfg;
  cfg.algorithm = Algorithm::gradient_dice;
  cfg.step_sizes.alpha = StepSchedule::constant(0.002);
  cfg.step_sizes.lambda = 1.0;
  cfg.n_steps = 400000;
  cfg.metrics_every = 400000;
  const RunResult r = run(p, cfg);
  EXPECT_LT((r.final_state.tau_weights - Vector::Ones(5)).cwiseAbs().maxCoeff(), 0.15);
  EXPECT_LT(r.records.back().r_err, 0.05);
}

TEST(Projection, BallProjection) {
  Vector inside = Eigen::Vector2d(0.3, 0.4);
  project_to_ball(inside, 1.0);
  EXPECT_EQ(inside, Vector(Eigen::Vector2d(0.3, 0.4)));
  Vector outside = Eigen::Vector2d(6.0, 8.0);
  project_to_ball(outside, 5.0);
  EXPECT_NEAR(outside.norm(), 5.0, 1e-12);
  EXPECT_NEAR(outside(0) / outside(1), 0.75, 1e-12);
  double head = 2.0;
  Vector tail = Eigen::Vector2d(0.0, 0.0);
  project_to_ball(head, tail, 1.0);
  EXPECT_NEAR(head, 1.0, 1e-15);
}

TEST(Projection, AveragedIterates) {
  const std::vector<Vector> h{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2), Eigen::Vector2d(2, 1)};
  EXPECT_LT((averaged_iterates(h) - Eigen::Vector2d(1, 1)).norm(), 1e-15);
  EXPECT_THROW(averaged_iterates({}), InvalidArgument);
}

TEST(ProjectedGq1, RunningAverageAndRadius) {
  const EvaluationProblem p = random_problem(6, 2, 0.1, 8);
  const SamplingDistribution s = p.sampler();
  Rng rng(4);
  LearnerState st = initial_state(Algorithm::projected_gq1, 2);
  std::vector<Vector> history;
  for (int k = 0; k < 50; ++k) {
    st = projected_gq1_step(st, s.draw(rng), p.features, 0.5, 0.3, 0.2);
    Vector u(3);
    u << st.r_hat, st.w;
    EXPECT_LE(u.norm(), 0.2 + 1e-12);
    EXPECT_LE(st.nu.norm(), 0.3 + 1e-12);
    history.push_back(u);
    Vector bar(3);
    bar << st.r_hat_bar, st.w_bar;
    EXPECT_LT((bar - averaged_iterates(history)).norm(), 1e-12);
  }
  EXPECT_THROW(projected_gq1_step(st, s.draw(rng), p.features, 0.5, 0.0, 1.0), InvalidArgument);
}

TEST(ProjectedGq2, RunningAverageIsMeanOfHistory) {
  const EvaluationProblem p = random_problem(6, 2, 0.1, 9);
  const SamplingDistribution s = p.sampler();
  Rng rng(5);
  LearnerState st = initial_state(Algorithm::projected_gq2, 2);
  std::vector<Vector> history;
  for (int k = 0; k < 40; ++k) {
    const auto [a, b] = s.draw_pair(rng);
    st = projected_gq2_step(st, a, b, p.features, 0.3, 0.1, 10.0, 10.0);
    history.push_back(st.w);
    if (k == 0) EXPECT_EQ(st.w_bar, st.w);
    EXPECT_LT((st.w_bar - averaged_iterates(history)).norm(), 1e-12);
  }
}

TEST(ProjectedGq2, RewardTracksTargetOfAverage) {
  const EvaluationProblem p = random_problem(8, 2, 0.1, 10);
  TrainConfig cfg;
  cfg.algorithm = Algorithm::projected_gq2;
  cfg.step_sizes.alpha = StepSchedule::constant(0.02);
  cfg.step_sizes.beta = StepSchedule::constant(0.01);
  cfg.n_steps = 100000;
  cfg.metrics_every = 100000;
  const RunResult r = run(p, cfg);
  const double target = r_hat_from_w(p, r.final_state.w_bar);
  EXPECT_NEAR(r.final_state.r_hat, target, 0.05);
}

TEST(ProjectedGq1, ErrorDecaysOnSolvableInstance) {
  const EvaluationProblem p = random_problem(8, 2, 0.0, 12);
  TrainConfig cfg;
  cfg.algorithm = Algorithm::projected_gq1;
  cfg.step_sizes.alpha = StepSchedule::constant(0.05);
  cfg.step_sizes.radius_dual = 100.0;
  cfg.step_sizes.radius_primal = 100.0;
  cfg.n_steps = 50000;
  cfg.metrics_every = 1000;
  const RunResult r = run(p, cfg);
  const double first = std::abs(r.records.front().r_hat - *exact_targets(p).reward_rate);
  const double last = std::abs(reported_r_hat(Algorithm::projected_gq1, r.final_state) -
                               *exact_targets(p).reward_rate);
  EXPECT_LT(last, 0.5 * first);
}

TEST(Dispatcher, RequiresSecondSampleForTwoSampleVariants) {
  const FeatureMap fm = small_features();
  StepSizes sizes;
  sizes.alpha = StepSchedule::constant(0.1);
  EXPECT_THROW(step(Algorithm::diff_gq2, initial_state(Algorithm::diff_gq2, 2), tuple(0, 1, 1.0),
                    nullptr, fm, sizes),
               InvalidArgument);
  const LearnerState s = step(Algorithm::diff_gq1, initial_state(Algorithm::diff_gq1, 2),
                              tuple(0, 1, 1.0), nullptr, fm, sizes);
  EXPECT_EQ(s.step_count, 1);
}
