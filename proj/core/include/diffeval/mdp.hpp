#pragma once

#include "diffeval/linalg.hpp"

#include <string>

namespace diffeval {

/// Finite MDP. State-action pairs are indexed state-major:
/// pair(s, a) = s * n_actions + a.
class Mdp {
 public:
  /// `reward` is |S| x |A|; `transition` is (|S||A|) x |S| with row
  /// pair(s, a) holding p(. | s, a). Throws InvalidArgument on malformed input.
  Mdp(Matrix reward, Matrix transition);

  int n_states() const { return static_cast<int>(reward_.rows()); }
  int n_actions() const { return static_cast<int>(reward_.cols()); }
  int n_pairs() const { return n_states() * n_actions(); }
  int pair(int s, int a) const { return s * n_actions() + a; }

  const Matrix& reward() const { return reward_; }
  const Matrix& transition() const { return transition_; }
  double reward(int s, int a) const { return reward_(s, a); }
  double transition(int s, int a, int s_next) const { return transition_(pair(s, a), s_next); }

  /// Reward as a vector over pairs.
  Vector reward_vector() const;

 private:
  Matrix reward_;
  Matrix transition_;
};

/// Target policy pi(a | s), stored |S| x |A|.
class Policy {
 public:
  explicit Policy(Matrix probs);

  /// pi(a | s) = probs(a) for every state.
  static Policy uniform_over_states(int n_states, const Vector& action_probs);

  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  const Matrix& probs() const { return probs_; }
  double operator()(int a, int s) const { return probs_(s, a); }

 private:
  Matrix probs_;
};

struct ExactSolution {
  double reward_rate = 0.0;
  /// Differential action values normalized so that stationary_sa . diff_q = 0.
  Vector diff_q;
  Vector stationary_sa;
};

struct UnichainDiagnostic {
  bool unichain = false;
  int recurrent_classes = 0;
  int transient_pairs = 0;
  std::string message;

  explicit operator bool() const { return unichain; }
};

/// P_pi((s,a),(s',a')) = p(s'|s,a) pi(a'|s').
Matrix transition_matrix(const Mdp& mdp, const Policy& pi);

/// Closed strongly connected components of the support graph of `p`.
UnichainDiagnostic is_unichain(const Matrix& p);
UnichainDiagnostic is_unichain(const Mdp& mdp, const Policy& pi);

/// Stationary distribution of a unichain stochastic matrix. Tries a direct
/// solve first and falls back to power iteration on (I + P) / 2.
/// Throws AssumptionViolation for multichain input and NumericalError if
/// neither method reaches a residual of 1e-10.
Vector stationary_sa_distribution(const Matrix& p);

double reward_rate_exact(const Mdp& mdp, const Policy& pi);

ExactSolution differential_q_exact(const Mdp& mdp, const Policy& pi);

/// Max-norm residual of q = r - rate * 1 + P q.
double bellman_residual(const Matrix& p, const Vector& r, double rate, const Vector& q);

}  // namespace diffeval
