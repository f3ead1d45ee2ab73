#pragma once

#include "diffeval/linalg.hpp"
#include "diffeval/rng.hpp"

namespace diffeval {

/// Linear features over state-action pairs. Row p of `x()` is x(s, a)^T for
/// pair p; `y()` is [1, X].
class FeatureMap {
 public:
  explicit FeatureMap(Matrix x);

  int n_pairs() const { return static_cast<int>(x_.rows()); }
  int n_features() const { return static_cast<int>(x_.cols()); }

  const RowMatrix& x() const { return x_; }
  const RowMatrix& y() const { return y_; }

  Matrix x_matrix() const { return x_; }
  Matrix y_matrix() const { return y_; }

  auto x_row(int pair) const { return x_.row(pair).transpose(); }
  auto y_row(int pair) const { return y_.row(pair).transpose(); }

 private:
  RowMatrix x_;
  RowMatrix y_;
};

inline constexpr int kBoyanStates = 13;
inline constexpr int kBoyanStateFeatures = 4;

/// Hat feature phi_i(j) = max(0, 1 - |j - 4i| / 4) for the 13-state chain.
Vector boyan_state_feature(int state);

/// State hat features concatenated with a one-hot action code (6 columns).
FeatureMap boyan_features();

/// Subtracts the d_mu-weighted mean feature from every row.
FeatureMap mean_center(const FeatureMap& fm, const Vector& d_mu);

/// Linearly independent columns.
bool check_assumption_3(const FeatureMap& fm);

/// No nonzero w with Xw constant, i.e. rank([1, X]) = K + 1.
bool check_assumption_4(const FeatureMap& fm);

/// Entries i.i.d. standard normal.
FeatureMap random_features(int n_pairs, int k, Rng& rng);

}  // namespace diffeval
