#include "diffeval/linalg.hpp"
#include "diffeval/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace diffeval;

TEST(Linalg, RankOfProductOfThinFactors) {
  Rng rng(3);
  Matrix a(8, 3), b(3, 6);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (int i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  EXPECT_EQ(linalg::numerical_rank(a * b), 3);
  EXPECT_EQ(linalg::numerical_rank(Matrix::Zero(4, 4)), 0);
}

TEST(Linalg, ConditionNumber) {
  Matrix d = Vector(Eigen::Vector3d(1.0, 10.0, 100.0)).asDiagonal();
  EXPECT_NEAR(linalg::condition_number(d), 100.0, 1e-9);
  EXPECT_TRUE(std::isinf(linalg::condition_number(Matrix::Zero(2, 2))));
  Matrix near(2, 2);
  near << 1.0, 0.0, 0.0, 1e-13;
  EXPECT_FALSE(linalg::is_well_conditioned(near));
  EXPECT_TRUE(linalg::is_well_conditioned(d));
}

TEST(Linalg, PseudoInverseSatisfiesPenroseConditions) {
  Rng rng(11);
  Matrix a(6, 2), b(2, 5);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (int i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  const Matrix m = a * b;
  const Matrix p = linalg::pseudo_inverse(m);
  EXPECT_LT((m * p * m - m).norm(), 1e-10);
  EXPECT_LT((p * m * p - p).norm(), 1e-10);
  EXPECT_LT((m * p - (m * p).transpose()).norm(), 1e-10);
  EXPECT_LT((p * m - (p * m).transpose()).norm(), 1e-10);
}

TEST(Linalg, SpdInverseSqrt) {
  Matrix s(2, 2);
  s << 4.0, 1.0, 1.0, 3.0;
  const auto r = linalg::spd_inverse_sqrt(s);
  ASSERT_TRUE(r.has_value());
  EXPECT_LT((*r * s * *r - Matrix::Identity(2, 2)).norm(), 1e-12);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_FALSE(linalg::spd_inverse_sqrt(indefinite).has_value());
}

TEST(Linalg, Eigenvalues) {
  Matrix a(2, 2);
  a << -1.0, 6.0, -2.0, 6.0;
  EXPECT_NEAR(linalg::max_real_eigenvalue(a), 3.0, 1e-12);
  Matrix rot(2, 2);
  rot << -0.5, 1.0, -1.0, -0.5;
  EXPECT_NEAR(linalg::max_real_eigenvalue(rot), -0.5, 1e-12);
  Matrix sym(2, 2);
  sym << 2.0, 1.0, 1.0, 2.0;
  EXPECT_NEAR(linalg::min_symmetric_eigenvalue(sym), 1.0, 1e-12);
  EXPECT_NEAR(linalg::spectral_norm(sym), 3.0, 1e-12);
}

TEST(Linalg, MinNonzeroSingularValue) {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 5.0;
  d(1, 1) = 0.5;
  EXPECT_NEAR(linalg::min_nonzero_singular_value(d), 0.5, 1e-12);
  EXPECT_EQ(linalg::min_nonzero_singular_value(Matrix::Zero(2, 2)), 0.0);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a) {
    for (std::uint64_t b = 0; b < 30; ++b) seen.insert(derive_seed(7, a, b));
  }
  EXPECT_EQ(seen.size(), 600u);
  EXPECT_EQ(derive_seed(7, 1, 2), derive_seed(7, 1, 2));
  EXPECT_NE(derive_seed(7, 1, 2), derive_seed(8, 1, 2));
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}
