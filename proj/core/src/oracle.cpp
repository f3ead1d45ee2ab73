#include "diffeval/oracle.hpp"

#include "diffeval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diffeval {

namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr int kBisectionSteps = 50;

Eigen::LDLT<Matrix> factor_spd(const Matrix& m, const char* name, const char* assumption) {
  if (!linalg::is_well_conditioned(m)) {
    throw AssumptionViolation(assumption, std::string(name) + " is singular");
  }
  return Eigen::LDLT<Matrix>(m);
}

Eigen::LDLT<Matrix> factor_c(const FixedPointMatrices& m) {
  return factor_spd(m.c, "C = Y^T D Y", "A4 nonconstant features");
}

Eigen::LDLT<Matrix> factor_c2(const FixedPointMatrices& m) {
  return factor_spd(m.c2, "C2 = X^T D X", "A3 independent features");
}

// -(H)^{-1} g for the ridge-regularized normal equations H u = -g.
Vector solve_normal_equations(const Matrix& h, const Vector& g, const char* what) {
  if (!linalg::is_well_conditioned(h)) {
    throw AssumptionViolation("invertible system", std::string(what) +
                                                       ": normal equations are singular; "
                                                       "use eta > 0");
  }
  return -h.partialPivLu().solve(g);
}

double weighted_sq_norm(const Vector& v, const Vector& weights) {
  return v.dot(weights.cwiseProduct(v));
}

}  // namespace

FixedPointMatrices assemble(const EvaluationProblem& problem) {
  const Matrix x = problem.features.x_matrix();
  const Matrix y = problem.features.y_matrix();
  const Vector& d = problem.d_mu;
  const auto dm = d.asDiagonal();
  const Eigen::Index n = problem.n_pairs();
  const Eigen::Index k = x.cols();
  const Matrix p_minus_i = problem.p_pi - Matrix::Identity(n, n);

  FixedPointMatrices m;
  m.a = y.transpose() * dm * p_minus_i * y;
  m.a.col(0) -= y.transpose() * d;
  m.b = y.transpose() * dm * problem.reward;
  m.c = y.transpose() * dm * y;

  // (D - d d^T) v = D v - d (d^T v)
  const Matrix centered_dynamics = dm * p_minus_i * x - d * (d.transpose() * p_minus_i * x);
  m.a2 = x.transpose() * centered_dynamics;
  m.b2 = x.transpose() * (dm * problem.reward - d * d.dot(problem.reward));
  m.c2 = x.transpose() * dm * x;

  m.a3 = x.transpose() * dm * p_minus_i * y;
  m.a3.col(0) -= x.transpose() * d;
  m.b3 = x.transpose() * dm * problem.reward;
  (void)k;
  return m;
}

Matrix ridge_selector(int k_plus_one) {
  Matrix i0 = Matrix::Identity(k_plus_one, k_plus_one);
  i0(0, 0) = 0.0;
  return i0;
}

std::string to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::unique:
      return "unique TD fixed point";
    case FixedPointKind::none:
      return "no TD fixed point";
    case FixedPointKind::infinite:
      return "infinitely many TD fixed points";
  }
  return "unknown";
}

TdFixedPoint td_fixed_point(const FixedPointMatrices& m) {
  TdFixedPoint out;
  out.condition = linalg::condition_number(m.a);
  if (out.condition <= linalg::kConditionLimit) {
    out.kind = FixedPointKind::unique;
    out.u = -m.a.partialPivLu().solve(m.b);
    return out;
  }
  Matrix augmented(m.a.rows(), m.a.cols() + 1);
  augmented << m.a, m.b;
  const int rank_a = linalg::numerical_rank(m.a);
  const int rank_ab = linalg::numerical_rank(augmented);
  out.kind = rank_ab > rank_a ? FixedPointKind::none : FixedPointKind::infinite;
  out.u = -linalg::pseudo_inverse(m.a) * m.b;
  return out;
}

double r_hat_from_w(const EvaluationProblem& problem, const Vector& w) {
  const Matrix x = problem.features.x_matrix();
  const Vector xw = x * w;
  return problem.d_mu.dot(problem.reward + problem.p_pi * xw - xw);
}

TwoStageFixedPoint td_fixed_point_two_stage(const EvaluationProblem& problem,
                                            const FixedPointMatrices& m) {
  TwoStageFixedPoint out;
  if (!linalg::is_well_conditioned(m.a2)) {
    out.w = -linalg::pseudo_inverse(m.a2) * m.b2;
    out.r_hat = r_hat_from_w(problem, out.w);
    return out;
  }
  out.unique = true;
  out.w = -m.a2.partialPivLu().solve(m.b2);
  out.r_hat = r_hat_from_w(problem, out.w);
  return out;
}

double mspbe1(const FixedPointMatrices& m, const Vector& u) {
  const auto c = factor_c(m);
  const Vector residual = m.a * u + m.b;
  return residual.dot(c.solve(residual));
}

double mspbe1_projection_form(const EvaluationProblem& problem, const Vector& u) {
  const Matrix y = problem.features.y_matrix();
  const Vector& d = problem.d_mu;
  const Matrix c = y.transpose() * d.asDiagonal() * y;
  if (!linalg::is_well_conditioned(c)) {
    throw AssumptionViolation("A4 nonconstant features", "C = Y^T D Y is singular");
  }
  const Vector yu = y * u;
  const Vector delta = problem.reward - u(0) * Vector::Ones(d.size()) + problem.p_pi * yu - yu;
  const Vector projected = y * c.ldlt().solve(y.transpose() * d.cwiseProduct(delta));
  return weighted_sq_norm(projected, d);
}

double j1_eta(const FixedPointMatrices& m, const Vector& u, double eta) {
  return mspbe1(m, u) + eta * u.tail(u.size() - 1).squaredNorm();
}

Vector j1_gradient(const FixedPointMatrices& m, const Vector& u, double eta) {
  const auto c = factor_c(m);
  Vector grad = 2.0 * m.a.transpose() * c.solve(m.a * u + m.b);
  grad.tail(u.size() - 1) += 2.0 * eta * u.tail(u.size() - 1);
  return grad;
}

Vector j1_minimizer(const FixedPointMatrices& m, double eta) {
  const auto c = factor_c(m);
  const Matrix c_inv_a = c.solve(m.a);
  const Matrix h = eta * ridge_selector(static_cast<int>(m.a.cols())) + m.a.transpose() * c_inv_a;
  return solve_normal_equations(h, m.a.transpose() * c.solve(m.b), "j1_minimizer");
}

double j1_saddle(const FixedPointMatrices& m, const Vector& u, const Vector& nu, double eta) {
  return 2.0 * nu.dot(m.a * u + m.b) - nu.dot(m.c * nu) +
         eta * u.tail(u.size() - 1).squaredNorm();
}

SaddleGradient j1_saddle_gradient(const FixedPointMatrices& m, const Vector& u, const Vector& nu,
                                  double eta) {
  SaddleGradient g;
  g.primal = 2.0 * m.a.transpose() * nu;
  g.primal.tail(u.size() - 1) += 2.0 * eta * u.tail(u.size() - 1);
  g.dual = 2.0 * (m.a * u + m.b) - 2.0 * m.c * nu;
  return g;
}

double mspbe2(const EvaluationProblem& problem, const Vector& w) {
  const Matrix x = problem.features.x_matrix();
  const Vector& d = problem.d_mu;
  const Matrix c2 = x.transpose() * d.asDiagonal() * x;
  if (!linalg::is_well_conditioned(c2)) {
    throw AssumptionViolation("A3 independent features", "C2 = X^T D X is singular");
  }
  const Vector xw = x * w;
  const Vector rbar = problem.reward + problem.p_pi * xw - xw;
  const Vector centered = rbar - d.dot(rbar) * Vector::Ones(d.size());
  const Vector projected = x * c2.ldlt().solve(x.transpose() * d.cwiseProduct(centered));
  return weighted_sq_norm(projected, d);
}

double mspbe2_norm_form(const FixedPointMatrices& m, const Vector& w) {
  const auto c2 = factor_c2(m);
  const Vector residual = m.a2 * w + m.b2;
  return residual.dot(c2.solve(residual));
}

double j2_eta(const FixedPointMatrices& m, const Vector& w, double eta) {
  return mspbe2_norm_form(m, w) + eta * w.squaredNorm();
}

Vector j2_gradient(const FixedPointMatrices& m, const Vector& w, double eta) {
  const auto c2 = factor_c2(m);
  return 2.0 * m.a2.transpose() * c2.solve(m.a2 * w + m.b2) + 2.0 * eta * w;
}

Vector j2_minimizer(const FixedPointMatrices& m, double eta) {
  const auto c2 = factor_c2(m);
  const Eigen::Index k = m.a2.cols();
  const Matrix h = eta * Matrix::Identity(k, k) + m.a2.transpose() * c2.solve(m.a2);
  return solve_normal_equations(h, m.a2.transpose() * c2.solve(m.b2), "j2_minimizer");
}

double j2_saddle(const FixedPointMatrices& m, const Vector& w, const Vector& nu, double eta) {
  return 2.0 * nu.dot(m.a2 * w + m.b2) - nu.dot(m.c2 * nu) + eta * w.squaredNorm();
}

SaddleGradient j2_saddle_gradient(const FixedPointMatrices& m, const Vector& w, const Vector& nu,
                                  double eta) {
  return SaddleGradient{2.0 * m.a2.transpose() * nu + 2.0 * eta * w,
                        2.0 * (m.a2 * w + m.b2) - 2.0 * m.c2 * nu};
}

Vector gq3_minimizer(const FixedPointMatrices& m, double eta) {
  if (!(eta > 0.0)) {
    throw InvalidArgument("gq3_minimizer: needs eta > 0");
  }
  const auto c2 = factor_c2(m);
  const Eigen::Index n = m.a3.cols();
  const Matrix h = eta * Matrix::Identity(n, n) + m.a3.transpose() * c2.solve(m.a3);
  return solve_normal_equations(h, m.a3.transpose() * c2.solve(m.b3), "gq3_minimizer");
}

RegularizationPathBound regularization_path_bound(const FixedPointMatrices& m, double eta) {
  const auto c2_inv_sqrt = linalg::spd_inverse_sqrt(m.c2);
  if (!c2_inv_sqrt) {
    throw AssumptionViolation("A3 independent features", "C2 = X^T D X is not positive definite");
  }
  const Matrix whitened = *c2_inv_sqrt * m.a2;
  const Vector whitened_b = *c2_inv_sqrt * m.b2;

  RegularizationPathBound out;
  out.sigma = linalg::min_nonzero_singular_value(whitened);
  out.w_zero = -linalg::pseudo_inverse(whitened) * whitened_b;
  out.fixed_point_residual = (m.a2 * out.w_zero + m.b2).norm();
  if (eta == 0.0) {
    out.w_eta = out.w_zero;
  } else {
    out.w_eta = j2_minimizer(m, eta);
  }
  out.lhs = (out.w_eta - out.w_zero).norm();
  out.rhs = out.sigma > 0.0 ? eta / std::pow(out.sigma, 3) * whitened_b.norm()
                            : std::numeric_limits<double>::infinity();
  return out;
}

Matrix assumption_7_matrix(const EvaluationProblem& problem, double xi) {
  const Matrix x = problem.features.x_matrix();
  const auto dm = problem.d_mu.asDiagonal();
  const Matrix c2 = x.transpose() * dm * x;
  const Matrix cross = x.transpose() * dm * problem.p_pi * x;
  const Eigen::Index k = x.cols();
  Matrix f(2 * k, 2 * k);
  f << c2, cross, cross.transpose(), xi * xi * c2;
  return f;
}

bool check_assumption_7(const EvaluationProblem& problem, double xi) {
  return linalg::min_symmetric_eigenvalue(assumption_7_matrix(problem, xi)) >= -kPsdTolerance;
}

double assumption_7_threshold(const EvaluationProblem& problem) {
  const Matrix x = problem.features.x_matrix();
  const auto dm = problem.d_mu.asDiagonal();
  const Matrix c2 = x.transpose() * dm * x;
  const Eigen::LLT<Matrix> llt(c2);
  if (llt.info() != Eigen::Success || !linalg::is_well_conditioned(c2)) {
    throw AssumptionViolation("A3 independent features", "C2 = X^T D X is singular");
  }
  const Matrix cross = x.transpose() * dm * problem.p_pi * x;
  const Matrix left = llt.matrixL().solve(cross);
  const Matrix whitened = llt.matrixL().solve(left.transpose()).transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened.transpose() * whitened,
                                                  Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

std::optional<double> min_feasible_xi(const EvaluationProblem& problem) {
  double hi = 1.0 - 1e-6;
  if (!check_assumption_7(problem, hi)) {
    return std::nullopt;
  }
  double lo = 0.0;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (check_assumption_7(problem, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double min_over_shift(const Vector& v, const Vector& g, const Vector& weights) {
  const double gg = weighted_sq_norm(g, weights);
  if (gg <= std::numeric_limits<double>::min()) {
    return std::sqrt(weighted_sq_norm(v, weights));
  }
  const double c = -v.dot(weights.cwiseProduct(g)) / gg;
  return std::sqrt(std::max(0.0, weighted_sq_norm(v + c * g, weights)));
}

double value_error(const EvaluationProblem& problem, const Vector& w, const Vector& q_pi) {
  const Vector residual = problem.features.x() * w - q_pi;
  return min_over_shift(residual, Vector::Ones(residual.size()), problem.d_mu);
}

BoundReport proposition1_bounds(const EvaluationProblem& problem, double xi) {
  BoundReport rep;
  rep.xi = xi;
  const Vector& d = problem.d_mu;
  const Eigen::Index n = problem.n_pairs();
  const Matrix x = problem.features.x_matrix();

  rep.flags.a1_unichain = static_cast<bool>(is_unichain(problem.p_pi));
  rep.flags.a3_independent = check_assumption_3(problem.features);
  rep.flags.a4_nonconstant = check_assumption_4(problem.features);
  rep.flags.a7_psd = check_assumption_7(problem, xi);
  rep.flags.a9_centered = (x.transpose() * d).lpNorm<Eigen::Infinity>() <= 1e-10;

  const FixedPointMatrices m = assemble(problem);
  const TdFixedPoint td = td_fixed_point(m);
  rep.fixed_point = td.kind;
  rep.flags.a6_fixed_point = td.kind != FixedPointKind::none;

  const ExactSolution exact = differential_q_exact(problem.mdp, problem.policy);
  const Vector w_star = td.u.tail(td.u.size() - 1);
  rep.value_lhs = value_error(problem, w_star, exact.diff_q);
  rep.reward_lhs = std::abs(exact.reward_rate - td.u(0));

  const Matrix c2 = x.transpose() * d.asDiagonal() * x;
  const Matrix projector = x * linalg::pseudo_inverse(c2) * x.transpose() * d.asDiagonal();
  const Matrix residual_map = projector - Matrix::Identity(n, n);
  rep.approximation_error =
      min_over_shift(residual_map * exact.diff_q, residual_map * Vector::Ones(n), d);

  const Vector sqrt_d = d.cwiseSqrt();
  const Matrix scaled_p = sqrt_d.asDiagonal() * problem.p_pi * sqrt_d.cwiseInverse().asDiagonal();
  rep.p_norm_d = linalg::spectral_norm(scaled_p);
  const Vector drift = (problem.p_pi - Matrix::Identity(n, n)).transpose() * d;
  rep.mu_deviation = std::sqrt(drift.dot(d.cwiseInverse().cwiseProduct(drift)));

  rep.value_rhs = (rep.p_norm_d + 1.0) / (1.0 - xi) * rep.approximation_error;
  rep.reward_rhs = rep.mu_deviation * rep.value_rhs;

  if (!rep.flags.a4_nonconstant) rep.warnings.emplace_back("A4 nonconstant features fails");
  if (!rep.flags.a6_fixed_point) rep.warnings.emplace_back("A6 no TD fixed point");
  if (!rep.flags.a7_psd) rep.warnings.emplace_back("A7 infeasible at this xi");
  if (!rep.flags.a9_centered) rep.warnings.emplace_back("A9 features not mean-centered");
  if (!rep.flags.a3_independent) rep.warnings.emplace_back("A3 dependent feature columns");
  return rep;
}

Vector ExpectedUpdate::fixed_point() const { return -g.partialPivLu().solve(h); }

Vector ExpectedUpdate::primal_limit() const {
  const Vector kappa = fixed_point();
  return kappa.tail(kappa.size() - dual_size);
}

namespace {

ExpectedUpdate block_update(const Matrix& c, const Matrix& a, const Vector& b, const Matrix& ridge) {
  const Eigen::Index nd = c.rows();
  const Eigen::Index np = a.cols();
  ExpectedUpdate out;
  out.dual_size = static_cast<int>(nd);
  out.g.resize(nd + np, nd + np);
  out.g << -c, a, -a.transpose(), -ridge;
  out.h = Vector::Zero(nd + np);
  out.h.head(nd) = b;
  return out;
}

}  // namespace

ExpectedUpdate expected_update_gq1(const FixedPointMatrices& m, double eta) {
  return block_update(m.c, m.a, m.b, eta * ridge_selector(static_cast<int>(m.a.cols())));
}

ExpectedUpdate expected_update_gq2(const FixedPointMatrices& m, double eta) {
  const Eigen::Index k = m.a2.cols();
  return block_update(m.c2, m.a2, m.b2, eta * Matrix::Identity(k, k));
}

ExpectedUpdate expected_update_gq3(const FixedPointMatrices& m, double eta) {
  const Eigen::Index n = m.a3.cols();
  return block_update(m.c2, m.a3, m.b3, eta * Matrix::Identity(n, n));
}

bool is_hurwitz(const Matrix& g) { return linalg::max_real_eigenvalue(g) < 0.0; }

FixedPointReport build_report(const EvaluationProblem& problem, double eta,
                              std::optional<double> xi) {
  FixedPointReport rep;
  rep.eta = eta;
  rep.matrices = assemble(problem);
  const auto& m = rep.matrices;
  rep.td = td_fixed_point(m);
  rep.two_stage = td_fixed_point_two_stage(problem, m);

  rep.flags.a1_unichain = static_cast<bool>(is_unichain(problem.p_pi));
  rep.flags.a3_independent = check_assumption_3(problem.features);
  rep.flags.a4_nonconstant = check_assumption_4(problem.features);
  rep.flags.a6_fixed_point = rep.td.kind != FixedPointKind::none;
  rep.flags.a9_centered =
      (problem.features.x_matrix().transpose() * problem.d_mu).lpNorm<Eigen::Infinity>() <= 1e-10;

  if (rep.flags.a1_unichain) {
    rep.reward_rate = reward_rate_exact(problem.mdp, problem.policy);
  } else {
    rep.warnings.emplace_back("A1 unichain fails");
  }

  const auto attempt = [&rep](auto&& fn) {
    try {
      fn();
    } catch (const AssumptionViolation& e) {
      if (std::find(rep.warnings.begin(), rep.warnings.end(), e.what()) == rep.warnings.end()) {
        rep.warnings.emplace_back(e.what());
      }
    }
  };
  attempt([&] { rep.u_eta_star = j1_minimizer(m, eta); });
  attempt([&] {
    rep.w_eta_star = j2_minimizer(m, eta);
    rep.r_hat_from_w = r_hat_from_w(problem, *rep.w_eta_star);
  });

  rep.mspbe1_at_solution = std::numeric_limits<double>::quiet_NaN();
  const Vector* u = rep.td.kind != FixedPointKind::none ? &rep.td.u
                    : rep.u_eta_star                    ? &*rep.u_eta_star
                                                        : nullptr;
  if (u != nullptr) attempt([&] { rep.mspbe1_at_solution = mspbe1(m, *u); });
  rep.mspbe2_at_solution = std::numeric_limits<double>::quiet_NaN();
  const Vector* w = rep.two_stage.unique ? &rep.two_stage.w
                    : rep.w_eta_star     ? &*rep.w_eta_star
                                         : nullptr;
  if (w != nullptr) attempt([&] { rep.mspbe2_at_solution = mspbe2_norm_form(m, *w); });

  if (xi && rep.flags.a1_unichain) {
    const FeatureMap centered = mean_center(problem.features, problem.d_mu);
    rep.bounds = proposition1_bounds(problem.with_features(centered), *xi);
    rep.flags.a7_psd = rep.bounds->flags.a7_psd;
  }
  return rep;
}

}  // namespace diffeval
