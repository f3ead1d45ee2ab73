#include "diffeval/training.hpp"

#include "diffeval/errors.hpp"
#include "diffeval/oracle.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace diffeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class RecentWindow {
 public:
  void push(double v) {
    if (count_ < kRecentWindow) ++count_;
    values_[head_] = v;
    head_ = (head_ + 1) % kRecentWindow;
  }

  double mean(double fallback) const {
    if (count_ == 0) return fallback;
    double s = 0.0;
    for (int i = 0; i < count_; ++i) s += values_[i];
    return s / count_;
  }

 private:
  std::array<double, kRecentWindow> values_{};
  int head_ = 0;
  int count_ = 0;
};

MetricRecord make_record(const EvaluationProblem& problem, const TrainConfig& config,
                         const Targets& targets, const LearnerState& state,
                         const RecentWindow& window) {
  MetricRecord rec;
  rec.step = state.step_count;
  rec.r_hat = reported_r_hat(config.algorithm, state);
  rec.r_bar_100 = window.mean(rec.r_hat);
  rec.r_err = targets.reward_rate ? std::abs(rec.r_bar_100 - *targets.reward_rate) : kNaN;
  rec.value_err = targets.q_pi
                      ? value_error(problem, reported_w(config.algorithm, state), *targets.q_pi)
                      : kNaN;
  return rec;
}

std::string describe(const TrainConfig& config) {
  std::ostringstream os;
  os << to_string(config.algorithm) << " (seed " << config.seed << ", alpha "
     << config.step_sizes.alpha.scale << ", eta " << config.step_sizes.eta << ", lambda "
     << config.step_sizes.lambda << ")";
  return os.str();
}

}  // namespace

Targets exact_targets(const EvaluationProblem& problem) {
  Targets t;
  if (!is_unichain(problem.p_pi)) return t;
  const ExactSolution exact = differential_q_exact(problem.mdp, problem.policy);
  t.reward_rate = exact.reward_rate;
  t.q_pi = exact.diff_q;
  return t;
}

RunResult run(const EvaluationProblem& problem, const SamplingDistribution& sampler,
              const TrainConfig& config, const Targets& targets) {
  if (config.n_steps < 0 || config.metrics_every < 1) {
    throw InvalidArgument("run: need n_steps >= 0 and metrics_every >= 1");
  }
  const int k = problem.n_features();
  LearnerState state = config.init ? *config.init : initial_state(config.algorithm, k);
  state.step_count = 0;
  const int per_update = samples_per_update(config.algorithm);

  RunResult result;
  RecentWindow window;
  Rng rng(config.seed);
  result.records.push_back(make_record(problem, config, targets, state, window));
  std::int64_t next_checkpoint = config.metrics_every;

  try {
    while (state.step_count + per_update <= config.n_steps) {
      const SampleTuple first = sampler.draw(rng);
      if (per_update == 2) {
        const SampleTuple second = sampler.draw(rng);
        window.push(reported_r_hat(config.algorithm, state));
        state = step(config.algorithm, std::move(state), first, &second, problem.features,
                     config.step_sizes);
      } else {
        state = step(config.algorithm, std::move(state), first, nullptr, problem.features,
                     config.step_sizes);
      }
      window.push(reported_r_hat(config.algorithm, state));
      if (state.step_count >= next_checkpoint) {
        result.records.push_back(make_record(problem, config, targets, state, window));
        while (next_checkpoint <= state.step_count) next_checkpoint += config.metrics_every;
      }
    }
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(describe(config), e.step());
  }
  if (result.records.back().step != state.step_count) {
    result.records.push_back(make_record(problem, config, targets, state, window));
  }
  result.final_state = std::move(state);
  return result;
}

RunResult run(const EvaluationProblem& problem, const TrainConfig& config) {
  return run(problem, problem.sampler(), config, exact_targets(problem));
}

}  // namespace diffeval
