#include "oracle.hpp"
#include "rfcd/operators.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rfcd;

namespace {

double inner(const MultiBandImage& a, const MultiBandImage& b) { return (a.data().array() * b.data().array()).sum(); }

MultiBandImage ramp4x4() {
  MultiBandImage X(4, 4, 1);
  for (int p = 0; p < 16; ++p) X.data()(0, p) = p + 1;
  return X;
}

}  // namespace

TEST(Spectral, IdentityLeavesImageUnchanged) {
  std::mt19937_64 rng(1);
  const MultiBandImage X = oracle::random_image({3, 2, 3}, rng);
  EXPECT_EQ(apply_spectral(SpectralResponse::identity(3), X).data(), X.data());
}

TEST(Spectral, AveragingRow) {
  MultiBandImage X(1, 1, 2);
  X.data() << 2, 4;
  const MultiBandImage Y = apply_spectral(SpectralResponse(Matrix::Constant(1, 2, 0.5)), X);
  ASSERT_EQ(Y.band_count(), 1);
  EXPECT_DOUBLE_EQ(Y.data()(0, 0), 3.0);
}

TEST(Spectral, BandMismatchNamesBothCounts) {
  const MultiBandImage X(2, 2, 4);
  try {
    apply_spectral(SpectralResponse::identity(3), X);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('3'), std::string::npos) << msg;
    EXPECT_NE(msg.find('4'), std::string::npos) << msg;
  }
}

TEST(Spectral, RejectsInvalidMatrices) {
  EXPECT_THROW(SpectralResponse(Matrix::Zero(1, 2)), std::invalid_argument);
  EXPECT_THROW(SpectralResponse(Matrix::Constant(3, 2, 0.5)), std::invalid_argument);
  Matrix neg(1, 2);
  neg << 1.5, -0.5;
  EXPECT_THROW(SpectralResponse{neg}, std::invalid_argument);
  EXPECT_THROW(SpectralResponse::averaging({{0, 5}}, 3), std::invalid_argument);
}

TEST(Blur, DeltaLeavesImageUnchanged) {
  std::mt19937_64 rng(2);
  const MultiBandImage X = oracle::random_image({5, 4, 2}, rng);
  EXPECT_EQ(apply_blur(BlurKernel::delta(), X).data(), X.data());
}

TEST(Blur, ConstantImageStaysConstant) {
  std::mt19937_64 rng(3);
  MultiBandImage X(6, 5, 2);
  X.data().setConstant(2.5);
  const MultiBandImage Y = apply_blur(oracle::random_kernel(5, rng), X);
  EXPECT_LT((Y.data().array() - 2.5).abs().maxCoeff(), 1e-13);
}

TEST(Blur, RampWithUniformKernel) {
  // Direct cyclic 3x3 averaging, frozen from the dense oracle.
  const MultiBandImage Y = apply_blur(BlurKernel::uniform(3), ramp4x4());
  const Matrix B = oracle::circulant_blur(BlurKernel::uniform(3).taps(), 4, 4);
  const Matrix expected = ramp4x4().data() * B;
  const double frozen[16] = {69, 66, 75, 72, 57, 54, 63, 60, 93, 90, 99, 96, 81, 78, 87, 84};  // times 9
  for (int p = 0; p < 16; ++p) {
    EXPECT_NEAR(Y.data()(0, p), expected(0, p), 1e-12);
    EXPECT_NEAR(Y.data()(0, p), frozen[p] / 9.0, 1e-12) << "pixel " << p;
  }
}

TEST(Blur, KernelLargerThanImageRejected) {
  EXPECT_THROW(apply_blur(BlurKernel::uniform(5), MultiBandImage(4, 4, 1)), std::invalid_argument);
}

TEST(Blur, KernelValidation) {
  EXPECT_THROW(BlurKernel(Matrix::Constant(2, 2, 0.25)), std::invalid_argument);
  EXPECT_THROW(BlurKernel(Matrix::Constant(3, 3, 0.2)), std::invalid_argument);
  Matrix skew = Matrix::Zero(3, 3);
  skew(0, 0) = 0.7;
  skew(2, 1) = 0.3;
  EXPECT_THROW(BlurKernel{skew}, std::invalid_argument);
}

TEST(Decimation, FactorOneIsIdentity) {
  EXPECT_EQ(decimate(Decimation(1, 1), ramp4x4()).data(), ramp4x4().data());
  EXPECT_EQ(upsample_adjoint(Decimation(1, 1), ramp4x4()).data(), ramp4x4().data());
}

TEST(Decimation, TopLeftPhase) {
  const MultiBandImage Y = decimate(Decimation(2, 2), ramp4x4());
  ASSERT_EQ(Y.width(), 2);
  ASSERT_EQ(Y.height(), 2);
  EXPECT_EQ(Y.at(0, 0, 0), 1);
  EXPECT_EQ(Y.at(0, 0, 1), 3);
  EXPECT_EQ(Y.at(0, 1, 0), 9);
  EXPECT_EQ(Y.at(0, 1, 1), 11);
}

TEST(Decimation, NonDivisibleRejected) {
  EXPECT_THROW(decimate(Decimation(2, 1), MultiBandImage(4, 5, 1)), std::invalid_argument);
  EXPECT_THROW(Decimation(0, 1), std::invalid_argument);
}

TEST(Decimation, UpsampleAdjointZeroFills) {
  MultiBandImage Z(1, 1, 1);
  Z.data()(0, 0) = 7;
  const MultiBandImage U = upsample_adjoint(Decimation(2, 2), Z);
  ASSERT_EQ(U.pixel_count(), 4);
  EXPECT_EQ(U.data()(0, 0), 7);
  EXPECT_EQ(U.data()(0, 1), 0);
  EXPECT_EQ(U.data()(0, 2), 0);
  EXPECT_EQ(U.data()(0, 3), 0);
}

TEST(Decimation, SelectionTimesAdjointIsExactIdentity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const MultiBandImage Z = oracle::random_image({3, 2, 2}, rng);
    const Decimation S(2 + trial % 2, 3);
    EXPECT_EQ(decimate(S, upsample_adjoint(S, Z)).data(), Z.data());
  }
}

TEST(Adjoints, AllPairsOnRandomInstances) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Geometry g{4, 4, 3};
    const MultiBandImage X = oracle::random_image(g, rng);
    Matrix Lm = Matrix::Random(2, 3).cwiseAbs();
    const SpectralResponse L(Lm);
    const MultiBandImage Ys = oracle::random_image({4, 4, 2}, rng);
    const double a = inner(apply_spectral(L, X), Ys), b = inner(X, apply_spectral_adjoint(L, Ys));
    EXPECT_LT(oracle::rel_diff(a, b), 1e-10);

    const BlurKernel B = oracle::random_kernel(3, rng);
    const MultiBandImage X2 = oracle::random_image(g, rng);
    EXPECT_LT(oracle::rel_diff(inner(apply_blur(B, X), X2), inner(X, apply_blur(B, X2))), 1e-10);

    const Decimation S(2, 2);
    const MultiBandImage Z = oracle::random_image({2, 2, 3}, rng);
    EXPECT_LT(oracle::rel_diff(inner(decimate(S, X), Z), inner(X, upsample_adjoint(S, Z))), 1e-10);

    const SpatialDegradation R{B, S};
    EXPECT_LT(oracle::rel_diff(inner(apply_spatial(R, X), Z), inner(X, apply_spatial_adjoint(R, Z))), 1e-10);

    const DegradationModel full{L, R};
    const MultiBandImage Yf = oracle::random_image({2, 2, 2}, rng);
    EXPECT_LT(oracle::rel_diff(inner(apply_forward(full, X), Yf), inner(X, apply_forward_adjoint(full, Yf))), 1e-10);
  }
}

TEST(Forward, EmptyModelAndSpectralOnly) {
  std::mt19937_64 rng(6);
  const MultiBandImage X = oracle::random_image({4, 4, 3}, rng);
  EXPECT_EQ(apply_forward(DegradationModel{}, X).data(), X.data());
  const SpectralResponse L = SpectralResponse::averaging({{0, 1}, {2}}, 3);
  EXPECT_EQ(apply_forward(DegradationModel{L, std::nullopt}, X).data(), apply_spectral(L, X).data());
}

TEST(Forward, MatchesDenseProduct) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Geometry g{4 + 4 * (trial % 2), 4, 3};
    const MultiBandImage X = oracle::random_image(g, rng);
    const SpectralResponse L(Matrix(Matrix::Random(2, 3).cwiseAbs()));
    const SpatialDegradation R{oracle::random_kernel(3, rng), Decimation(2, 2)};
    const DegradationModel m{L, R};
    const Matrix dense = L.matrix() * X.data() * oracle::spatial_matrix(R, g.width, g.height);
    EXPECT_LT(oracle::rel_diff(apply_forward(m, X).data(), dense), 1e-10);
    const Vector v = oracle::forward_matrix(m, g) * oracle::vec(X);
    EXPECT_LT(oracle::rel_diff(oracle::vec(apply_forward(m, X)), v), 1e-10);
  }
}

TEST(Forward, BlurCommutesWithSpectralMixing) {
  std::mt19937_64 rng(8);
  const MultiBandImage X = oracle::random_image({5, 4, 3}, rng);
  const SpectralResponse L = SpectralResponse::averaging({{0, 1}, {1, 2}}, 3);
  const BlurKernel B = oracle::random_kernel(3, rng);
  EXPECT_LT(oracle::rel_diff(apply_spectral(L, apply_blur(B, X)).data(), apply_blur(B, apply_spectral(L, X)).data()),
            1e-10);
}

TEST(Noise, ZeroVariancesGiveZeroImage) {
  const MultiBandImage N = sample_noise(NoiseModel({0.0, 0.0}), {8, 8, 2}, 3);
  EXPECT_EQ(N.data().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Noise, SameSeedSameOutput) {
  const NoiseModel n({1.0, 2.0});
  EXPECT_EQ(sample_noise(n, {16, 8, 2}, 11).data(), sample_noise(n, {16, 8, 2}, 11).data());
  EXPECT_NE(sample_noise(n, {16, 8, 2}, 11).data(), sample_noise(n, {16, 8, 2}, 12).data());
}

TEST(Noise, RejectsNegativeVarianceAndWrongBandCount) {
  EXPECT_THROW(NoiseModel({1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(sample_noise(NoiseModel({1.0}), {2, 2, 2}, 0), std::invalid_argument);
}

TEST(Noise, EmpiricalVariancesAtLargeSample) {
  const MultiBandImage N = sample_noise(NoiseModel({1.0, 4.0}), {1000, 100, 2}, 21);
  const double n = N.pixel_count();
  for (int b = 0; b < 2; ++b) {
    const double mean = N.data().row(b).mean();
    const double var = (N.data().row(b).array() - mean).square().sum() / (n - 1);
    EXPECT_NEAR(var / (b == 0 ? 1.0 : 4.0), 1.0, 0.05);
  }
}

TEST(Gaussian, SideOneIsDelta) {
  const BlurKernel k = build_gaussian_blur(1.0, 1);
  ASSERT_EQ(k.rows(), 1);
  EXPECT_EQ(k.taps()(0, 0), 1.0);
}

TEST(Gaussian, SymmetricAndNormalized) {
  const BlurKernel k = build_gaussian_blur(1.0, 3);
  EXPECT_EQ(k.taps(), Matrix(k.taps().reverse()));
  EXPECT_NEAR(k.taps().sum(), 1.0, 1e-12);
}

TEST(Gaussian, NarrowerKernelHasLargerCenter) {
  EXPECT_GT(build_gaussian_blur(0.5, 5).taps()(2, 2), build_gaussian_blur(2.0, 5).taps()(2, 2));
}

TEST(Gaussian, RejectsBadArguments) {
  EXPECT_THROW(build_gaussian_blur(1.0, 4), std::invalid_argument);
  EXPECT_THROW(build_gaussian_blur(0.0, 3), std::invalid_argument);
}

TEST(Geometry, ObservedShapes) {
  const DegradationModel m{SpectralResponse::averaging({{0, 1, 2}}, 3), SpatialDegradation{BlurKernel::delta(), Decimation(2, 4)}};
  EXPECT_EQ(m.observed_geometry({8, 6, 3}), (Geometry{2, 3, 1}));
  EXPECT_THROW(m.observed_geometry({8, 5, 3}), std::invalid_argument);
  EXPECT_THROW(m.observed_geometry({8, 6, 4}), std::invalid_argument);
}
