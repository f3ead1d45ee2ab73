#pragma once

#include <Eigen/Dense>

#include <optional>

namespace diffeval {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace linalg {

/// Relative singular-value cutoff used for numerical rank and pseudoinverses.
inline constexpr double kRankTolerance = 1e-10;

/// Systems whose 2-norm condition number exceeds this are treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// Number of singular values above `rel_tol * sigma_max`.
int numerical_rank(const Matrix& m, double rel_tol = kRankTolerance);

/// Ratio of largest to smallest singular value; +inf for rank-deficient input.
double condition_number(const Matrix& m);

bool is_well_conditioned(const Matrix& m, double limit = kConditionLimit);

/// Moore-Penrose pseudoinverse via SVD with cutoff `rel_tol * sigma_max`.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = kRankTolerance);

/// Symmetric inverse square root of a symmetric positive definite matrix.
/// Returns nullopt if any eigenvalue is not strictly positive.
std::optional<Matrix> spd_inverse_sqrt(const Matrix& m);

/// Smallest singular value above the rank cutoff (0 for a zero matrix).
double min_nonzero_singular_value(const Matrix& m, double rel_tol = kRankTolerance);

/// Largest real part over the eigenvalues of a general square matrix.
double max_real_eigenvalue(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix (the upper triangle is ignored).
double min_symmetric_eigenvalue(const Matrix& m);

double spectral_norm(const Matrix& m);

}  // namespace linalg
}  // namespace diffeval
