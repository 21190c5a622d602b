#include "oracle.hpp"
#include "rfcd/regularization.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rfcd;

namespace {

MultiBandImage column(double a, double b) {
  MultiBandImage X(1, 1, 2);
  X.data() << a, b;
  return X;
}

// Bisection on the derivative of 0.5 (t - r)^2 + kappa t over t in [0, r]: the prox of
// kappa ||x|| along the ray through a column of norm r.
double ray_minimizer(double r, double kappa) {
  auto df = [&](double t) { return t - r + kappa; };
  if (df(0.0) >= 0.0) return 0.0;
  double lo = 0.0, hi = r;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (df(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(L21, Examples) {
  EXPECT_EQ(l21_norm(MultiBandImage(3, 2, 4)), 0.0);
  EXPECT_DOUBLE_EQ(l21_norm(column(3, 4)), 5.0);
  MultiBandImage two(2, 1, 2);
  two.data() << 3, 0, 4, 0;
  EXPECT_DOUBLE_EQ(l21_norm(two), 5.0);
}

TEST(L21, TriangleInequalityAndHomogeneity) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const MultiBandImage A = oracle::random_image({4, 3, 3}, rng), B = oracle::random_image({4, 3, 3}, rng);
    EXPECT_LE(l21_norm(A + B), l21_norm(A) + l21_norm(B) + 1e-12);
    EXPECT_NEAR(l21_norm(-2.5 * A), 2.5 * l21_norm(A), 1e-12);
  }
}

TEST(Prox, Examples) {
  std::mt19937_64 rng(2);
  const MultiBandImage A = oracle::random_image({3, 3, 2}, rng);
  EXPECT_EQ(group_soft_threshold(A, 0.0).data(), A.data());
  const MultiBandImage shrunk = group_soft_threshold(column(3, 4), 2.5);
  EXPECT_NEAR(shrunk.data()(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(shrunk.data()(1, 0), 2.0, 1e-15);
  EXPECT_EQ(group_soft_threshold(column(3, 4), 5.0).data().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(group_soft_threshold(A, -1.0), std::invalid_argument);
}

TEST(Prox, MatchesOneDimensionalMinimizer) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const MultiBandImage a = oracle::random_image({1, 1, 4}, rng, -2.0, 2.0);
    const double kappa = u(rng);
    const double r = a.data().norm();
    const Vector expected = a.data().col(0) * (ray_minimizer(r, kappa) / r);
    const Vector got = group_soft_threshold(a, kappa).data().col(0);
    EXPECT_LT((got - expected).norm(), 1e-12) << "trial " << trial;
  }
}

TEST(Prox, NonExpansive) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const MultiBandImage a = oracle::random_image({3, 2, 3}, rng), b = oracle::random_image({3, 2, 3}, rng);
    const double kappa = 0.5 * (trial % 5);
    EXPECT_LE((group_soft_threshold(a, kappa) - group_soft_threshold(b, kappa)).data().norm(),
              (a - b).data().norm() + 1e-14);
  }
}

TEST(Tikhonov, Examples) {
  std::mt19937_64 rng(5);
  const MultiBandImage X = oracle::random_image({3, 1, 2}, rng);
  EXPECT_EQ(tikhonov_penalty(X, X), 0.0);
  MultiBandImage ones(3, 1, 2);
  ones.data().setOnes();
  EXPECT_DOUBLE_EQ(tikhonov_penalty(X + ones, X), 6.0);
  EXPECT_THROW(tikhonov_penalty(X, MultiBandImage(3, 1, 3)), std::invalid_argument);
}

TEST(Params, Validation) {
  EXPECT_NO_THROW((RegularizationParams{0.0, 0.0}.validate()));
  EXPECT_THROW((RegularizationParams{-1.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((RegularizationParams{0.0, std::nan("")}.validate()), std::invalid_argument);
}

TEST(CrudeEstimate, NoDegradationsReturnsInput) {
  std::mt19937_64 rng(6);
  const MultiBandImage Y = oracle::random_image({4, 3, 2}, rng);
  EXPECT_EQ(crude_estimate(Y, DegradationModel{}, Y.geometry()).data(), Y.data());
}

TEST(CrudeEstimate, SpectralPseudoInverse) {
  MultiBandImage Y(1, 1, 1);
  Y.data()(0, 0) = 3.0;
  const DegradationModel m{SpectralResponse(Matrix::Constant(1, 2, 0.5)), std::nullopt};
  const MultiBandImage X = crude_estimate(Y, m, {1, 1, 2});
  EXPECT_NEAR(X.data()(0, 0), 3.0, 1e-14);
  EXPECT_NEAR(X.data()(1, 0), 3.0, 1e-14);
}

TEST(CrudeEstimate, NearestNeighbourReplication) {
  MultiBandImage Y(1, 1, 1);
  Y.data()(0, 0) = 7.0;
  const DegradationModel m{std::nullopt, SpatialDegradation{BlurKernel::delta(), Decimation(2, 2)}};
  const MultiBandImage X = crude_estimate(Y, m, {2, 2, 1});
  EXPECT_EQ(X.data(), Matrix::Constant(1, 4, 7.0));
  EXPECT_THROW(crude_estimate(Y, m, {4, 4, 1}), std::invalid_argument);
}
