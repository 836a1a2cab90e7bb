#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cope/losses.hpp"
#include "test_util.hpp"

namespace cope {
namespace {

using testing::random_matrix;
using testing::random_vector;

TEST(MseLoss, Examples) {
  std::mt19937_64 rng(1);
  const Matrix t = random_matrix(4, 3, rng);
  EXPECT_EQ(mse_loss(t, t), 0.0);
  Matrix shifted = t;
  for (auto& v : shifted.values()) v += 1.0;
  EXPECT_NEAR(mse_loss(shifted, t), 1.0, 1e-15);
  EXPECT_EQ(mse_loss(Matrix::from_rows({{0}}), Matrix::from_rows({{2}})), 4.0);
  EXPECT_THROW(mse_loss(t, Matrix(3, 4)), std::invalid_argument);
}

TEST(MmdLoss, IdenticalSamplesGiveZero) {
  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(20, 2, rng);
  const double bw[] = {0.1, 1.0, 10.0};
  EXPECT_LT(std::abs(mmd_loss(x, x, bw)), 1e-12);
}

TEST(MmdLoss, TwoPointMassesClosedForm) {
  const double r = 0.8, sigma = 0.5;
  const Matrix x = Matrix::from_rows({{0.0, 0.0}});
  const Matrix y = Matrix::from_rows({{r, 0.0}});
  const double bw[] = {sigma};
  EXPECT_NEAR(mmd_loss(x, y, bw), 2.0 * (1.0 - std::exp(-r * r / (2 * sigma * sigma))), 1e-14);
}

TEST(MmdLoss, PermutationInvariantAndSymmetric) {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(7, 3, rng), y = random_matrix(9, 3, rng);
  const double bw[] = {0.5, 2.0};
  const double base = mmd_loss(x, y, bw);
  EXPECT_GE(base, 0.0);
  EXPECT_NEAR(mmd_loss(y, x, bw), base, 1e-12);
  std::vector<std::size_t> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix px(7, 3);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 3; ++j) px(i, j) = x(perm[i], j);
  EXPECT_NEAR(mmd_loss(px, y, bw), base, 1e-12);
}

TEST(MmdLoss, RejectsBadInput) {
  const double bw[] = {1.0};
  const double bad_bw[] = {0.0};
  EXPECT_THROW(mmd_loss(Matrix(0, 2), Matrix(3, 2), bw), std::invalid_argument);
  EXPECT_THROW(mmd_loss(Matrix(2, 2), Matrix(3, 3), bw), std::invalid_argument);
  EXPECT_THROW(mmd_loss(Matrix(2, 2), Matrix(3, 2), bad_bw), std::invalid_argument);
}

TEST(MedianBandwidths, ScalesTheMedianDistance) {
  // Pairwise distances 1, 3, 2.
  const Matrix pts = Matrix::from_rows({{0, 0}, {1, 0}, {3, 0}});
  const auto bw = median_bandwidths(pts);
  ASSERT_EQ(bw.size(), kBandwidthMultipliers.size());
  for (std::size_t i = 0; i < bw.size(); ++i) EXPECT_DOUBLE_EQ(bw[i], 2.0 * kBandwidthMultipliers[i]);
}

TEST(MedianBandwidths, DegenerateBatchFallsBackToOne) {
  const auto bw = median_bandwidths(Matrix(4, 2, 0.5));
  for (std::size_t i = 0; i < bw.size(); ++i) EXPECT_EQ(bw[i], kBandwidthMultipliers[i]);
}

TEST(GanLosses, ZeroLogits) {
  const Vector zeros(5, 0.0);
  const GanLosses l = nonsat_gan_losses(zeros, zeros);
  EXPECT_NEAR(l.discriminator, 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(l.generator, std::log(2.0), 1e-15);
}

TEST(GanLosses, SaturationLimit) {
  const GanLosses l = nonsat_gan_losses(Vector{60.0, 80.0}, Vector{-70.0, -60.0});
  EXPECT_LT(l.discriminator, 1e-20);
  EXPECT_GT(l.generator, 59.0);
}

TEST(GanLosses, GeneratorLossDecreasesInFakeLogit) {
  const Vector real{0.0};
  double previous = std::numeric_limits<double>::infinity();
  for (double f = -30.0; f <= 30.0; f += 0.5) {
    const double g = nonsat_gan_losses(real, Vector{f}).generator;
    EXPECT_LT(g, previous);
    previous = g;
  }
}

TEST(GanLosses, RejectsNonFiniteOrEmpty) {
  EXPECT_THROW(nonsat_gan_losses(Vector{std::nan("")}, Vector{0.0}), std::invalid_argument);
  EXPECT_THROW(nonsat_gan_losses(Vector{}, Vector{0.0}), std::invalid_argument);
}

TEST(Diversity, Examples) {
  EXPECT_EQ(diversity_regularizer(Vector{1, 2}, Vector{1, 2}, Vector{0}, Vector{1}), 0.0);
  EXPECT_EQ(diversity_regularizer(Vector{50}, Vector{0}, Vector{0}, Vector{1}, 10.0), 10.0);
  EXPECT_EQ(diversity_regularizer(Vector{0, 0}, Vector{1, 3}, Vector{0, 0}, Vector{1, 1}, 10.0), 2.0);
}

TEST(Diversity, RejectsDegenerateInput) {
  EXPECT_THROW(diversity_regularizer(Vector{0}, Vector{1}, Vector{1, 2}, Vector{1, 2}), std::invalid_argument);
  EXPECT_THROW(diversity_regularizer(Vector{0}, Vector{1}, Vector{1}, Vector{2}, 0.0), std::invalid_argument);
  EXPECT_THROW(diversity_regularizer(Vector{0}, Vector{1, 2}, Vector{1}, Vector{2}), std::invalid_argument);
}

TEST(Diversity, NeverExceedsTauAndSaturatesAtIt) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> scale(0.0, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector g1 = random_vector(3, rng), z1 = random_vector(2, rng), z2 = random_vector(2, rng);
    Vector g2 = random_vector(3, rng);
    const double s = scale(rng);
    for (auto& v : g2) v *= s;
    const double tau = 10.0;
    const double value = diversity_regularizer(g1, g2, z1, z2, tau);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 3; ++i) num += std::abs(g1[i] - g2[i]);
    for (std::size_t i = 0; i < 2; ++i) den += std::abs(z1[i] - z2[i]);
    EXPECT_LE(value, tau);
    if (num / den >= tau) {
      EXPECT_EQ(value, tau);
    }
  }
}

TEST(Diversity, TapeTermIsTheBatchMean) {
  std::mt19937_64 rng(5);
  const Matrix g1 = random_matrix(6, 2, rng), g2 = random_matrix(6, 2, rng);
  const Matrix z1 = random_matrix(6, 3, rng), z2 = random_matrix(6, 3, rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < 6; ++i) expected += diversity_regularizer(g1.row(i), g2.row(i), z1.row(i), z2.row(i), 0.8);
  expected /= 6.0;
  ad::Tape tape;
  const ad::NodeId term = diversity_term(tape, tape.constant(g1), tape.constant(g2), z1, z2, 0.8);
  EXPECT_NEAR(tape.scalar(term), expected, 1e-14);
  EXPECT_THROW(diversity_term(tape, tape.constant(g1), tape.constant(g2), z1, z1, 0.8), std::invalid_argument);
}

TEST(Diversity, TapeTermGradient) {
  std::mt19937_64 rng(6);
  Matrix g1 = random_matrix(4, 2, rng);
  const Matrix g2 = random_matrix(4, 2, rng), z1 = random_matrix(4, 3, rng), z2 = random_matrix(4, 3, rng);
  const auto objective = [&](ad::Tape& t) { return diversity_term(t, t.parameter(0, g1), t.constant(g2), z1, z2, 1.0); };
  ad::Tape tape;
  const auto grads = tape.backward(objective(tape));
  Matrix* ptrs[] = {&g1};
  const double err = ad::finite_diff_check(
      [&] {
        ad::Tape t;
        return t.scalar(objective(t));
      },
      ptrs, grads, 1e-6);
  EXPECT_LT(err, 1e-6);
}

}  // namespace
}  // namespace cope
