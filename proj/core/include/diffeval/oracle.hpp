#pragma once

#include "diffeval/linalg.hpp"
#include "diffeval/mdp.hpp"
#include "diffeval/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace diffeval {

/// Expected-update matrices. With Y = [1, X], D = diag(d_mu), e1 the first
/// basis vector of R^{K+1}:
///   a  = Y^T D (P - I) Y - Y^T d_mu e1^T      b  = Y^T D r      c  = Y^T D Y
///   a2 = X^T (D - d d^T)(P - I) X             b2 = X^T (D - d d^T) r
///   c2 = X^T D X
///   a3 = X^T D (P - I) Y - X^T d_mu e1^T      b3 = X^T D r
struct FixedPointMatrices {
  Matrix a;
  Vector b;
  Matrix c;
  Matrix a2;
  Vector b2;
  Matrix c2;
  Matrix a3;
  Vector b3;

  int n_features() const { return static_cast<int>(c2.rows()); }
};

FixedPointMatrices assemble(const EvaluationProblem& problem);

/// diag(0, 1, ..., 1): ridge on w but not on the reward-rate coordinate.
Matrix ridge_selector(int k_plus_one);

enum class FixedPointKind { unique, none, infinite };

std::string to_string(FixedPointKind kind);

struct TdFixedPoint {
  FixedPointKind kind = FixedPointKind::none;
  /// -A^{-1} b when unique; the minimum-norm solution when there are
  /// infinitely many; the minimum-norm least-squares point otherwise.
  Vector u;
  double condition = 0.0;
};

/// Solves A u + b = 0. A is treated as invertible iff cond(A) <= 1e12;
/// otherwise the system is classified by comparing rank(A) and rank([A | b]).
TdFixedPoint td_fixed_point(const FixedPointMatrices& m);

struct TwoStageFixedPoint {
  bool unique = false;
  Vector w;
  double r_hat = 0.0;
};

/// w_TD = -A2^{-1} b2, r_TD = d_mu^T (r + P X w_TD - X w_TD).
TwoStageFixedPoint td_fixed_point_two_stage(const EvaluationProblem& problem,
                                            const FixedPointMatrices& m);

/// d_mu^T (r + P X w - X w).
double r_hat_from_w(const EvaluationProblem& problem, const Vector& w);

/// ||A u + b||^2 in the C^{-1} norm. Throws AssumptionViolation("A4 ...")
/// when C is singular.
double mspbe1(const FixedPointMatrices& m, const Vector& u);

/// ||Pi_Y delta(u)||_D^2 with delta(u) = r - u_0 1 + P Y u - Y u.
double mspbe1_projection_form(const EvaluationProblem& problem, const Vector& u);

double j1_eta(const FixedPointMatrices& m, const Vector& u, double eta);
Vector j1_gradient(const FixedPointMatrices& m, const Vector& u, double eta);

/// -(eta I0 + A^T C^{-1} A)^{-1} A^T C^{-1} b. Throws for eta = 0 with a
/// singular A.
Vector j1_minimizer(const FixedPointMatrices& m, double eta);

/// Saddle objective 2 nu^T (A u + b) - nu^T C nu + eta u^T I0 u.
double j1_saddle(const FixedPointMatrices& m, const Vector& u, const Vector& nu, double eta);

struct SaddleGradient {
  Vector primal;
  Vector dual;
};
SaddleGradient j1_saddle_gradient(const FixedPointMatrices& m, const Vector& u, const Vector& nu,
                                  double eta);

/// ||Pi_X (rbar_w - d_mu^T rbar_w 1)||_D^2 with rbar_w = r + P X w - X w.
double mspbe2(const EvaluationProblem& problem, const Vector& w);
/// ||A2 w + b2||^2 in the C2^{-1} norm.
double mspbe2_norm_form(const FixedPointMatrices& m, const Vector& w);

double j2_eta(const FixedPointMatrices& m, const Vector& w, double eta);
Vector j2_gradient(const FixedPointMatrices& m, const Vector& w, double eta);
Vector j2_minimizer(const FixedPointMatrices& m, double eta);

/// 2 nu^T (A2 w + b2) - nu^T C2 nu + eta ||w||^2.
double j2_saddle(const FixedPointMatrices& m, const Vector& w, const Vector& nu, double eta);
SaddleGradient j2_saddle_gradient(const FixedPointMatrices& m, const Vector& w, const Vector& nu,
                                  double eta);

/// Limit point of Diff-GQ3: -(eta I + A3^T C2^{-1} A3)^{-1} A3^T C2^{-1} b3.
/// Requires eta > 0 (A3^T C2^{-1} A3 has rank at most K).
Vector gq3_minimizer(const FixedPointMatrices& m, double eta);

struct RegularizationPathBound {
  double lhs = 0.0;    ///< ||w*_eta - w*_0||
  double rhs = 0.0;    ///< eta / sigma^3 ||C2^{-1/2} b2||
  double sigma = 0.0;  ///< smallest nonzero singular value of C2^{-1/2} A2
  Vector w_eta;
  Vector w_zero;       ///< -(C2^{-1/2} A2)^+ C2^{-1/2} b2
  double fixed_point_residual = 0.0;  ///< ||A2 w_zero + b2||
};

RegularizationPathBound regularization_path_bound(const FixedPointMatrices& m, double eta);

/// F = [[X^T D X, X^T D P X], [X^T P^T D X, xi^2 X^T D X]].
Matrix assumption_7_matrix(const EvaluationProblem& problem, double xi);

/// F positive semidefinite: smallest eigenvalue >= -1e-10.
bool check_assumption_7(const EvaluationProblem& problem, double xi);

/// Smallest xi >= 0 with F PSD, in closed form: the spectral norm of
/// L^{-1} X^T D P X L^{-T} with C2 = L L^T (Schur complement of F).
/// Throws AssumptionViolation("A3 ...") when C2 is singular.
double assumption_7_threshold(const EvaluationProblem& problem);

/// Smallest xi in (0, 1) with F PSD, by 50 bisection steps; nullopt if F is
/// not PSD at xi = 1 - 1e-6.
std::optional<double> min_feasible_xi(const EvaluationProblem& problem);

/// min over c of ||v + c g||_D for D = diag(weights).
double min_over_shift(const Vector& v, const Vector& g, const Vector& weights);

/// inf_c ||X w - (q_pi + c 1)||_D.
double value_error(const EvaluationProblem& problem, const Vector& w, const Vector& q_pi);

struct AssumptionFlags {
  bool a1_unichain = false;
  bool a3_independent = false;
  bool a4_nonconstant = false;
  bool a6_fixed_point = false;
  bool a7_psd = false;
  bool a9_centered = false;
};

struct BoundReport {
  double xi = 0.0;
  FixedPointKind fixed_point = FixedPointKind::none;
  double value_lhs = 0.0;   ///< inf_c ||X w* - q_pi^c||_D
  double value_rhs = 0.0;
  double reward_lhs = 0.0;  ///< |r_pi - r*|
  double reward_rhs = 0.0;
  double approximation_error = 0.0;  ///< inf_c ||Pi_X q^c - q^c||_D
  double p_norm_d = 0.0;             ///< ||P_pi||_D
  double mu_deviation = 0.0;         ///< ||d_mu^T (P_pi - I)||_{D^{-1}}
  AssumptionFlags flags;
  std::vector<std::string> warnings;

  bool assumptions_hold() const {
    return flags.a1_unichain && flags.a3_independent && flags.a4_nonconstant &&
           flags.a6_fixed_point && flags.a7_psd && flags.a9_centered;
  }
};

/// Both fixed-point quality bounds at the given xi. Center the features
/// first (mean_center) for the zero-mean assumption to hold; failures are
/// flagged and the quantities are still computed.
BoundReport proposition1_bounds(const EvaluationProblem& problem, double xi);

/// kappa <- kappa + alpha (G kappa + h) in expectation, kappa = [nu; primal].
struct ExpectedUpdate {
  Matrix g;
  Vector h;

  /// -G^{-1} h.
  Vector fixed_point() const;
  /// Primal half of fixed_point().
  Vector primal_limit() const;
  int dual_size = 0;
};

/// [[-C, A], [-A^T, -eta I0]], h = [b; 0].
ExpectedUpdate expected_update_gq1(const FixedPointMatrices& m, double eta);
/// [[-C2, A2], [-A2^T, -eta I]], h = [b2; 0].
ExpectedUpdate expected_update_gq2(const FixedPointMatrices& m, double eta);
/// [[-C2, A3], [-A3^T, -eta I]], h = [b3; 0].
ExpectedUpdate expected_update_gq3(const FixedPointMatrices& m, double eta);

bool is_hurwitz(const Matrix& g);

struct FixedPointReport {
  FixedPointMatrices matrices;
  TdFixedPoint td;
  TwoStageFixedPoint two_stage;
  double eta = 0.0;
  std::optional<Vector> u_eta_star;
  std::optional<Vector> w_eta_star;
  double r_hat_from_w = 0.0;
  double mspbe1_at_solution = 0.0;
  double mspbe2_at_solution = 0.0;
  double reward_rate = 0.0;
  AssumptionFlags flags;
  std::optional<BoundReport> bounds;
  std::vector<std::string> warnings;
};

/// Runs the whole oracle. Bounds are computed on mean-centered features when
/// `xi` is given.
FixedPointReport build_report(const EvaluationProblem& problem, double eta,
                              std::optional<double> xi = std::nullopt);

}  // namespace diffeval
