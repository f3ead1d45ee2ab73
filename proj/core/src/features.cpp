#include "diffeval/features.hpp"

#include "diffeval/errors.hpp"

#include <algorithm>
#include <cmath>

namespace diffeval {

FeatureMap::FeatureMap(Matrix x) : x_(std::move(x)) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw InvalidArgument("FeatureMap: need at least one pair and one feature");
  }
  if (!x_.allFinite()) {
    throw InvalidArgument("FeatureMap: non-finite feature entry");
  }
  y_.resize(x_.rows(), x_.cols() + 1);
  y_.col(0).setOnes();
  y_.rightCols(x_.cols()) = x_;
}

Vector boyan_state_feature(int state) {
  if (state < 0 || state >= kBoyanStates) {
    throw InvalidArgument("boyan_state_feature: state out of range");
  }
  Vector phi(kBoyanStateFeatures);
  for (int i = 0; i < kBoyanStateFeatures; ++i) {
    phi(i) = std::max(0.0, 1.0 - std::abs(state - 4.0 * i) / 4.0);
  }
  return phi;
}

FeatureMap boyan_features() {
  constexpr int kActions = 2;
  Matrix x = Matrix::Zero(kBoyanStates * kActions, kBoyanStateFeatures + kActions);
  for (int s = 0; s < kBoyanStates; ++s) {
    const Vector phi = boyan_state_feature(s);
    for (int a = 0; a < kActions; ++a) {
      const int row = s * kActions + a;
      x.row(row).head(kBoyanStateFeatures) = phi.transpose();
      x(row, kBoyanStateFeatures + a) = 1.0;
    }
  }
  return FeatureMap(std::move(x));
}

FeatureMap mean_center(const FeatureMap& fm, const Vector& d_mu) {
  if (d_mu.size() != fm.n_pairs()) {
    throw InvalidArgument("mean_center: d_mu has the wrong length");
  }
  const Matrix x = fm.x_matrix();
  const Eigen::RowVectorXd mean = d_mu.transpose() * x / d_mu.sum();
  return FeatureMap(x.rowwise() - mean);
}

bool check_assumption_3(const FeatureMap& fm) {
  return linalg::numerical_rank(fm.x_matrix()) == fm.n_features();
}

bool check_assumption_4(const FeatureMap& fm) {
  return linalg::numerical_rank(fm.y_matrix()) == fm.n_features() + 1;
}

FeatureMap random_features(int n_pairs, int k, Rng& rng) {
  if (k < 1 || k > n_pairs) {
    throw InvalidArgument("random_features: need 1 <= k <= n_pairs");
  }
  Matrix x(n_pairs, k);
  for (int i = 0; i < n_pairs; ++i) {
    for (int j = 0; j < k; ++j) {
      x(i, j) = rng.normal();
    }
  }
  return FeatureMap(std::move(x));
}

}  // namespace diffeval
