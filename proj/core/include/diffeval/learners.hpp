#pragma once

#include "diffeval/features.hpp"
#include "diffeval/linalg.hpp"
#include "diffeval/sampling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace diffeval {

enum class Algorithm {
  diff_sgq,
  diff_gq1,
  diff_gq2,
  diff_gq3,
  diff_gq4,
  gradient_dice,
  projected_gq1,
  projected_gq2,
};

/// "diff-sgq", "diff-gq1", ..., "gradient-dice", "projected-gq1", "projected-gq2".
std::string to_string(Algorithm algo);
/// Inverse of to_string. Throws InvalidArgument for unknown names.
Algorithm parse_algorithm(std::string_view name);
std::vector<Algorithm> all_algorithms();

/// Raw samples consumed per update (2 for the two-sample GQ2 variants).
int samples_per_update(Algorithm algo);

/// Learner iterate. For the u = [r_hat; w] algorithms (GQ1, GQ3, Projected GQ1)
/// r_hat is u's first coordinate.
struct LearnerState {
  Vector w;
  double r_hat = 0.0;
  Vector nu;
  /// Raw samples consumed so far.
  std::int64_t step_count = 0;

  // GradientDICE
  Vector tau_weights;
  Vector nu_weights;
  double dice_u = 0.0;

  // Projected variants: running averages of the iterates.
  Vector w_bar;
  double r_hat_bar = 0.0;

  bool all_finite() const;
};

/// All-zero state with the dual dimension `algo` expects.
LearnerState initial_state(Algorithm algo, int n_features);

/// Reward-rate estimate reported for the algorithm (the averaged iterate for
/// Projected GQ1).
double reported_r_hat(Algorithm algo, const LearnerState& state);
/// Value weights reported for the algorithm (w_bar for the projected variants).
const Vector& reported_w(Algorithm algo, const LearnerState& state);

struct StepSchedule {
  enum class Kind { constant, polynomial };
  Kind kind = Kind::constant;
  double scale = 0.0;
  double power = 0.0;

  static StepSchedule constant(double a) { return {Kind::constant, a, 0.0}; }
  /// a / (1 + k)^p.
  static StepSchedule polynomial(double a, double p) { return {Kind::polynomial, a, p}; }

  double operator()(std::int64_t k) const;
};

struct StepSizes {
  StepSchedule alpha;
  /// Second timescale for Diff-GQ2 and Projected GQ2; alpha when unset.
  std::optional<StepSchedule> beta;
  double eta = 0.0;
  double lambda = 0.0;
  /// Ball radii for the projected variants (dual, primal).
  double radius_dual = 100.0;
  double radius_primal = 100.0;

  double beta_at(std::int64_t k) const { return beta ? (*beta)(k) : alpha(k); }
};

LearnerState diff_sgq_step(LearnerState state, const SampleTuple& sample, const FeatureMap& fm,
                           double alpha);

LearnerState diff_gq1_step(LearnerState state, const SampleTuple& sample, const FeatureMap& fm,
                           double alpha, double eta);

/// Two i.i.d. tuples per update; step_count advances by 2.
LearnerState diff_gq2_step(LearnerState state, const SampleTuple& first,
                           const SampleTuple& second, const FeatureMap& fm, double alpha,
                           double beta, double eta);

LearnerState diff_gq3_step(LearnerState state, const SampleTuple& sample, const FeatureMap& fm,
                           double alpha, double eta);

LearnerState diff_gq4_step(LearnerState state, const SampleTuple& sample, const FeatureMap& fm,
                           double alpha, double eta);

LearnerState gradient_dice_step(LearnerState state, const SampleTuple& sample,
                                const FeatureMap& fm, double alpha, double lambda, double eta);

LearnerState projected_gq1_step(LearnerState state, const SampleTuple& sample,
                                const FeatureMap& fm, double alpha, double radius_dual,
                                double radius_primal);

LearnerState projected_gq2_step(LearnerState state, const SampleTuple& first,
                                const SampleTuple& second, const FeatureMap& fm, double alpha,
                                double beta, double radius_dual, double radius_primal);

/// Euclidean projection onto the centered ball of the given radius.
void project_to_ball(Eigen::Ref<Vector> v, double radius);

/// Projection of the stacked vector [head; tail] onto the ball.
void project_to_ball(double& head, Eigen::Ref<Vector> tail, double radius);

/// Arithmetic mean of a sequence of iterates.
Vector averaged_iterates(const std::vector<Vector>& history);

/// One update of `algo` with the schedule evaluated at the update index.
/// `second` is required by the two-sample variants and ignored otherwise.
LearnerState step(Algorithm algo, LearnerState state, const SampleTuple& first,
                  const SampleTuple* second, const FeatureMap& fm, const StepSizes& sizes);

}  // namespace diffeval
