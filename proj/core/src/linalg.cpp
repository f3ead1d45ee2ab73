#include "diffeval/linalg.hpp"

#include <limits>

namespace diffeval::linalg {

namespace {

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) {
    return Vector();
  }
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

}  // namespace

int numerical_rank(const Matrix& m, double rel_tol) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) {
    return 0;
  }
  const double cutoff = rel_tol * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      ++rank;
    }
  }
  return rank;
}

double condition_number(const Matrix& m) {
  const Vector s = singular_values(m);
  if (s.size() == 0) {
    return std::numeric_limits<double>::infinity();
  }
  const double smallest = s(s.size() - 1);
  if (smallest == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return s(0) / smallest;
}

bool is_well_conditioned(const Matrix& m, double limit) {
  return m.rows() == m.cols() && m.rows() > 0 && condition_number(m) <= limit;
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  if (s.size() > 0 && s(0) > 0.0) {
    const double cutoff = rel_tol * s(0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cutoff) {
        inv(i) = 1.0 / s(i);
      }
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

std::optional<Matrix> spd_inverse_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) {
    return std::nullopt;
  }
  const Vector& values = eig.eigenvalues();
  if (values.size() == 0 || values.minCoeff() <= 0.0) {
    return std::nullopt;
  }
  const Vector inv_sqrt = values.cwiseSqrt().cwiseInverse();
  return Matrix(eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose());
}

double min_nonzero_singular_value(const Matrix& m, double rel_tol) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) {
    return 0.0;
  }
  const double cutoff = rel_tol * s(0);
  double smallest = s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      smallest = s(i);
    }
  }
  return smallest;
}

double max_real_eigenvalue(const Matrix& m) {
  Eigen::EigenSolver<Matrix> eig(m, /*computeEigenvectors=*/false);
  return eig.eigenvalues().real().maxCoeff();
}

double min_symmetric_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double spectral_norm(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

}  // namespace diffeval::linalg
