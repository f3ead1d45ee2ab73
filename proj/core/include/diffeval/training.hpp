#pragma once

#include "diffeval/learners.hpp"
#include "diffeval/problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace diffeval {

struct MetricRecord {
  std::int64_t step = 0;
  double r_hat = 0.0;
  /// Mean reward-rate estimate over the most recent 100 raw steps.
  double r_bar_100 = 0.0;
  /// |r_bar_100 - r_pi|; NaN without an oracle.
  double r_err = 0.0;
  /// inf_c ||X w - q_pi^c||_D; NaN without an oracle.
  double value_err = 0.0;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::diff_gq1;
  StepSizes step_sizes;
  std::int64_t n_steps = 5000;
  std::int64_t metrics_every = 100;
  std::uint64_t seed = 0;
  /// Starting iterate; all zeros when unset.
  std::optional<LearnerState> init;
};

struct Targets {
  std::optional<double> reward_rate;
  std::optional<Vector> q_pi;
};

/// r_pi and q_pi from the exact solver, empty when the chain is not unichain.
Targets exact_targets(const EvaluationProblem& problem);

struct RunResult {
  std::vector<MetricRecord> records;
  LearnerState final_state;
};

inline constexpr int kRecentWindow = 100;

/// Runs `n_steps` raw samples (GQ2 variants consume them in pairs) and
/// records metrics at step 0, every `metrics_every` raw steps and at the end.
/// Deterministic in `config.seed`. Learner errors are rethrown with the
/// configuration attached.
RunResult run(const EvaluationProblem& problem, const SamplingDistribution& sampler,
              const TrainConfig& config, const Targets& targets);

RunResult run(const EvaluationProblem& problem, const TrainConfig& config);

}  // namespace diffeval
