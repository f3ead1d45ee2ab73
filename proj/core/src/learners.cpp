#include "diffeval/learners.hpp"

#include "diffeval/errors.hpp"

#include <cmath>

namespace diffeval {

namespace {

struct NamedAlgorithm {
  Algorithm algo;
  const char* name;
};

constexpr NamedAlgorithm kNames[] = {
    {Algorithm::diff_sgq, "diff-sgq"},
    {Algorithm::diff_gq1, "diff-gq1"},
    {Algorithm::diff_gq2, "diff-gq2"},
    {Algorithm::diff_gq3, "diff-gq3"},
    {Algorithm::diff_gq4, "diff-gq4"},
    {Algorithm::gradient_dice, "gradient-dice"},
    {Algorithm::projected_gq1, "projected-gq1"},
    {Algorithm::projected_gq2, "projected-gq2"},
};

LearnerState checked(LearnerState state, Algorithm algo) {
  if (!state.all_finite()) {
    throw NonFiniteError(to_string(algo), state.step_count);
  }
  return state;
}

bool finite_or_empty(const Vector& v) { return v.size() == 0 || v.allFinite(); }

}  // namespace

std::string to_string(Algorithm algo) {
  for (const auto& n : kNames) {
    if (n.algo == algo) return n.name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& n : kNames) {
    if (name == n.name) return n.algo;
  }
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

std::vector<Algorithm> all_algorithms() {
  std::vector<Algorithm> out;
  for (const auto& n : kNames) out.push_back(n.algo);
  return out;
}

int samples_per_update(Algorithm algo) {
  return algo == Algorithm::diff_gq2 || algo == Algorithm::projected_gq2 ? 2 : 1;
}

bool LearnerState::all_finite() const {
  return std::isfinite(r_hat) && std::isfinite(dice_u) && std::isfinite(r_hat_bar) &&
         finite_or_empty(w) && finite_or_empty(nu) && finite_or_empty(tau_weights) &&
         finite_or_empty(nu_weights) && finite_or_empty(w_bar);
}

LearnerState initial_state(Algorithm algo, int n_features) {
  if (n_features < 1) {
    throw InvalidArgument("initial_state: need at least one feature");
  }
  LearnerState s;
  s.w = Vector::Zero(n_features);
  switch (algo) {
    case Algorithm::diff_gq1:
    case Algorithm::projected_gq1:
      s.nu = Vector::Zero(n_features + 1);
      break;
    case Algorithm::diff_gq2:
    case Algorithm::diff_gq3:
    case Algorithm::diff_gq4:
    case Algorithm::projected_gq2:
      s.nu = Vector::Zero(n_features);
      break;
    case Algorithm::gradient_dice:
      s.tau_weights = Vector::Zero(n_features);
      s.nu_weights = Vector::Zero(n_features);
      break;
    case Algorithm::diff_sgq:
      break;
  }
  if (algo == Algorithm::projected_gq1 || algo == Algorithm::projected_gq2) {
    s.w_bar = Vector::Zero(n_features);
  }
  return s;
}

double reported_r_hat(Algorithm algo, const LearnerState& state) {
  return algo == Algorithm::projected_gq1 ? state.r_hat_bar : state.r_hat;
}

const Vector& reported_w(Algorithm algo, const LearnerState& state) {
  if (algo == Algorithm::projected_gq1 || algo == Algorithm::projected_gq2) return state.w_bar;
  return state.w;
}

double StepSchedule::operator()(std::int64_t k) const {
  if (kind == Kind::constant) return scale;
  return scale / std::pow(1.0 + static_cast<double>(k), power);
}

LearnerState diff_sgq_step(LearnerState state, const SampleTuple& t, const FeatureMap& fm,
                           double alpha) {
  const auto x = fm.x_row(t.pair);
  const auto xn = fm.x_row(t.next_pair);
  const double delta = t.r - state.r_hat + xn.dot(state.w) - x.dot(state.w);
  state.w.noalias() += alpha * delta * x;
  state.r_hat += alpha * delta;
  state.step_count += 1;
  return checked(std::move(state), Algorithm::diff_sgq);
}

namespace {

// Shared body of Diff-GQ1 and Projected GQ1 with u = [r_hat; w].
void gq1_update(LearnerState& s, const SampleTuple& t, const FeatureMap& fm, double alpha,
                double eta) {
  const auto x = fm.x_row(t.pair);
  const auto xn = fm.x_row(t.next_pair);
  const auto nu_tail = s.nu.tail(s.nu.size() - 1);
  const double delta = t.r - s.r_hat + xn.dot(s.w) - x.dot(s.w);
  const double y_nu = s.nu(0) + x.dot(nu_tail);
  const double dual_step = alpha * (delta - y_nu);
  // (y - y' + e1) has first coordinate 1 and tail x - x'.
  s.r_hat += alpha * y_nu;
  s.w *= 1.0 - alpha * eta;
  s.w.noalias() += alpha * y_nu * (x - xn);
  s.nu(0) += dual_step;
  s.nu.tail(s.nu.size() - 1).noalias() += dual_step * x;
}

// Shared nu and w body of Diff-GQ2 and Projected GQ2.
void gq2_update(LearnerState& s, const SampleTuple& t1, const SampleTuple& t2,
                const FeatureMap& fm, double alpha, double eta) {
  const auto x1 = fm.x_row(t1.pair);
  const auto x1n = fm.x_row(t1.next_pair);
  const auto x2 = fm.x_row(t2.pair);
  const auto x2n = fm.x_row(t2.next_pair);
  const double delta1 = t1.r + x1n.dot(s.w) - x1.dot(s.w);
  const double delta2 = t2.r + x2n.dot(s.w) - x2.dot(s.w);
  const double x_nu = x1.dot(s.nu);
  const double dual_step = alpha * (delta1 - delta2 - x_nu);
  s.w *= 1.0 - alpha * eta;
  s.w.noalias() += alpha * x_nu * ((x1 - x1n) - (x2 - x2n));
  s.nu.noalias() += dual_step * x1;
}

// (1/2) sum_i (R_i + x_i'^T w - x_i^T w)
double mean_td_target(const SampleTuple& t1, const SampleTuple& t2, const FeatureMap& fm,
                      const Vector& w) {
  const double g1 = t1.r + fm.x_row(t1.next_pair).dot(w) - fm.x_row(t1.pair).dot(w);
  const double g2 = t2.r + fm.x_row(t2.next_pair).dot(w) - fm.x_row(t2.pair).dot(w);
  return 0.5 * (g1 + g2);
}

}  // namespace

LearnerState diff_gq1_step(LearnerState state, const SampleTuple& t, const FeatureMap& fm,
                           double alpha, double eta) {
  gq1_update(state, t, fm, alpha, eta);
  state.step_count += 1;
  return checked(std::move(state), Algorithm::diff_gq1);
}

LearnerState diff_gq2_step(LearnerState state, const SampleTuple& first,
                           const SampleTuple& second, const FeatureMap& fm, double alpha,
                           double beta, double eta) {
  const double target = mean_td_target(first, second, fm, state.w);
  gq2_update(state, first, second, fm, alpha, eta);
  state.r_hat += beta * (target - state.r_hat);
  state.step_count += 2;
  return checked(std::move(state), Algorithm::diff_gq2);
}

LearnerState diff_gq3_step(LearnerState state, const SampleTuple& t, const FeatureMap& fm,
                           double alpha, double eta) {
  const auto x = fm.x_row(t.pair);
  const auto xn = fm.x_row(t.next_pair);
  const double delta = t.r - state.r_hat + xn.dot(state.w) - x.dot(state.w);
  const double x_nu = x.dot(state.nu);
  const double shrink = 1.0 - alpha * eta;
  state.r_hat = shrink * state.r_hat + alpha * x_nu;
  state.w *= shrink;
  state.w.noalias() += alpha * x_nu * (x - xn);
  state.nu.noalias() += alpha * (delta - x_nu) * x;
  state.step_count += 1;
  return checked(std::move(state), Algorithm::diff_gq3);
}

LearnerState diff_gq4_step(LearnerState state, const SampleTuple& t, const FeatureMap& fm,
                           double alpha, double eta) {
  const auto x = fm.x_row(t.pair);
  const auto xn = fm.x_row(t.next_pair);
  const double target = t.r + xn.dot(state.w) - x.dot(state.w);
  const double x_nu = x.dot(state.nu);
  state.nu.noalias() += alpha * (target - state.r_hat - x_nu) * x;
  state.r_hat += alpha * (target - state.r_hat);
  state.w *= 1.0 - alpha * eta;
  state.w.noalias() += alpha * x_nu * (x - xn);
  state.step_count += 1;
  return checked(std::move(state), Algorithm::diff_gq4);
}

LearnerState gradient_dice_step(LearnerState state, const SampleTuple& t, const FeatureMap& fm,
                                double alpha, double lambda, double eta) {
  const auto x = fm.x_row(t.pair);
  const auto xn = fm.x_row(t.next_pair);
  const double tau = x.dot(state.tau_weights);
  const double nu = x.dot(state.nu_weights);
  const double nu_next = xn.dot(state.nu_weights);
  const double u = state.dice_u;
  // Gradients of tau nu' - tau nu - nu^2/2 + lambda (u tau - u - u^2/2) + eta/2 |theta_tau|^2.
  state.tau_weights *= 1.0 - alpha * eta;
  state.tau_weights.noalias() -= alpha * (nu_next - nu + lambda * u) * x;
  state.nu_weights.noalias() += alpha * (tau * xn - (tau + nu) * x);
  state.dice_u += alpha * lambda * (tau - 1.0 - u);
  state.r_hat += alpha * (tau * t.r - state.r_hat);
  state.step_count += 1;
  return checked(std::move(state), Algorithm::gradient_dice);
}

void project_to_ball(Eigen::Ref<Vector> v, double radius) {
  const double n = v.norm();
  if (n > radius) v *= radius / n;
}

void project_to_ball(double& head, Eigen::Ref<Vector> tail, double radius) {
  const double n = std::sqrt(head * head + tail.squaredNorm());
  if (n > radius) {
    const double scale = radius / n;
    head *= scale;
    tail *= scale;
  }
}

LearnerState projected_gq1_step(LearnerState state, const SampleTuple& t, const FeatureMap& fm,
                                double alpha, double radius_dual, double radius_primal) {
  if (!(radius_dual > 0.0) || !(radius_primal > 0.0)) {
    throw InvalidArgument("projected_gq1_step: radii must be positive");
  }
  gq1_update(state, t, fm, alpha, 0.0);
  project_to_ball(state.nu, radius_dual);
  project_to_ball(state.r_hat, state.w, radius_primal);
  state.step_count += 1;
  const double inv_k = 1.0 / static_cast<double>(state.step_count);
  state.r_hat_bar += (state.r_hat - state.r_hat_bar) * inv_k;
  state.w_bar += (state.w - state.w_bar) * inv_k;
  return checked(std::move(state), Algorithm::projected_gq1);
}

LearnerState projected_gq2_step(LearnerState state, const SampleTuple& first,
                                const SampleTuple& second, const FeatureMap& fm, double alpha,
                                double beta, double radius_dual, double radius_primal) {
  if (!(radius_dual > 0.0) || !(radius_primal > 0.0)) {
    throw InvalidArgument("projected_gq2_step: radii must be positive");
  }
  const double target = mean_td_target(first, second, fm, state.w_bar);
  gq2_update(state, first, second, fm, alpha, 0.0);
  project_to_ball(state.nu, radius_dual);
  project_to_ball(state.w, radius_primal);
  const double k = static_cast<double>(state.step_count / 2);
  state.w_bar = (k * state.w_bar + state.w) / (k + 1.0);
  state.r_hat += beta * (target - state.r_hat);
  state.step_count += 2;
  return checked(std::move(state), Algorithm::projected_gq2);
}

Vector averaged_iterates(const std::vector<Vector>& history) {
  if (history.empty()) {
    throw InvalidArgument("averaged_iterates: empty history");
  }
  Vector sum = Vector::Zero(history.front().size());
  for (const auto& v : history) sum += v;
  return sum / static_cast<double>(history.size());
}

LearnerState step(Algorithm algo, LearnerState state, const SampleTuple& first,
                  const SampleTuple* second, const FeatureMap& fm, const StepSizes& sizes) {
  const std::int64_t k = state.step_count / samples_per_update(algo);
  const double alpha = sizes.alpha(k);
  if (samples_per_update(algo) == 2 && second == nullptr) {
    throw InvalidArgument(to_string(algo) + ": needs a second sample");
  }
  switch (algo) {
    case Algorithm::diff_sgq:
      return diff_sgq_step(std::move(state), first, fm, alpha);
    case Algorithm::diff_gq1:
      return diff_gq1_step(std::move(state), first, fm, alpha, sizes.eta);
    case Algorithm::diff_gq2:
      return diff_gq2_step(std::move(state), first, *second, fm, alpha, sizes.beta_at(k),
                           sizes.eta);
    case Algorithm::diff_gq3:
      return diff_gq3_step(std::move(state), first, fm, alpha, sizes.eta);
    case Algorithm::diff_gq4:
      return diff_gq4_step(std::move(state), first, fm, alpha, sizes.eta);
    case Algorithm::gradient_dice:
      return gradient_dice_step(std::move(state), first, fm, alpha, sizes.lambda, sizes.eta);
    case Algorithm::projected_gq1:
      return projected_gq1_step(std::move(state), first, fm, alpha, sizes.radius_dual,
                                sizes.radius_primal);
    case Algorithm::projected_gq2:
      return projected_gq2_step(std::move(state), first, *second, fm, alpha, sizes.beta_at(k),
                                sizes.radius_dual, sizes.radius_primal);
  }
  throw InvalidArgument("unknown algorithm");
}

}  // namespace diffeval
