#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "cope/rng.hpp"
#include "cope/tasks.hpp"

namespace cope {
namespace {

TEST(Rng, StreamsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(7, "init"), derive_seed(7, "init"));
  EXPECT_NE(derive_seed(7, "init"), derive_seed(7, "data"));
  EXPECT_NE(derive_seed(7, "init"), derive_seed(8, "init"));
  auto a = make_stream(1, "noise"), b = make_stream(1, "noise");
  EXPECT_EQ(a(), b());
}

TEST(PointCloud, CentersAreSeparated) {
  for (std::size_t k = 1; k <= 8; ++k) {
    const CondPointCloud task = make_point_cloud(k);
    EXPECT_EQ(task.classes(), k);
    EXPECT_NO_THROW(task.validate());
    for (std::size_t a = 0; a < k; ++a) {
      EXPECT_NEAR(std::hypot(task.centers(a, 0), task.centers(a, 1)), 0.5, 1e-12);
      for (std::size_t b = a + 1; b < k; ++b)
        EXPECT_GE(std::hypot(task.centers(a, 0) - task.centers(b, 0), task.centers(a, 1) - task.centers(b, 1)),
                  4 * task.stddev);
    }
  }
}

TEST(PointCloud, OverlappingClustersAreRejected) {
  EXPECT_THROW(make_point_cloud(4, 0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(make_point_cloud(0), std::invalid_argument);
}

TEST(PointCloud, SamplesConcentrateOnTheirCenter) {
  const CondPointCloud task = make_point_cloud(4);
  std::mt19937_64 rng(1);
  for (std::size_t c = 0; c < 4; ++c) {
    const Matrix s = sample_class(task, c, 2000, rng);
    double mx = 0, my = 0, hits = 0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      mx += s(i, 0) / 2000;
      my += s(i, 1) / 2000;
      hits += nearest_center(task, s.row(i)) == c;
    }
    EXPECT_NEAR(mx, task.centers(c, 0), 0.01);
    EXPECT_NEAR(my, task.centers(c, 1), 0.01);
    EXPECT_GT(hits / 2000, 0.99);
  }
}

TEST(PointCloud, OneHotRows) {
  const Matrix m = one_hot_rows(3, 1, 2);
  EXPECT_EQ(m, Matrix::from_rows({{0, 1, 0}, {0, 1, 0}}));
  EXPECT_THROW(one_hot_rows(3, 3, 1), std::invalid_argument);
}

TEST(PolyRegressionTask, TargetsComeFromTheExplicitPolynomial) {
  std::mt19937_64 rng(2);
  const PolyRegression task = make_poly_regression(3, 2, 1, 64, rng);
  EXPECT_NO_THROW(task.data.validate());
  ASSERT_EQ(task.data.variables.size(), 2u);
  EXPECT_EQ(task.data.samples(), 64u);
  for (std::size_t i = 0; i < 64; ++i) {
    std::vector<Vector> z;
    for (const auto& v : task.data.variables) {
      for (double x : v.row(i)) {
        EXPECT_GE(x, -1.0);
        EXPECT_LE(x, 1.0);
      }
      z.emplace_back(v.row(i).begin(), v.row(i).end());
    }
    EXPECT_NEAR(eval_explicit(task.target, z)[0], task.data.targets(i, 0), 1e-14);
  }
}

TEST(PolyRegressionTask, SameSeedSameTask) {
  std::mt19937_64 a(3), b(3);
  EXPECT_EQ(make_poly_regression(2, 2, 2, 16, a).data.targets, make_poly_regression(2, 2, 2, 16, b).data.targets);
}

TEST(Downsample, LowResolutionIsTheBlockAverage) {
  std::mt19937_64 rng(4);
  const Downsample1D task = make_downsample_1d(16, 4, 3, 10, rng);
  ASSERT_EQ(task.data.variables.size(), 2u);
  EXPECT_EQ(task.data.variables[0].cols(), 3u);
  EXPECT_EQ(task.data.variables[1].cols(), 4u);
  EXPECT_EQ(task.data.targets.cols(), 16u);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t b = 0; b < 4; ++b) {
      double mean = 0.0;
      for (std::size_t j = 0; j < 4; ++j) mean += task.data.targets(i, 4 * b + j) / 4.0;
      EXPECT_NEAR(task.data.variables[1](i, b), mean, 1e-14);
    }
  EXPECT_THROW(make_downsample_1d(16, 3, 3, 10, rng), std::invalid_argument);
  EXPECT_THROW(make_downsample_1d(16, 4, 0, 10, rng), std::invalid_argument);
}

TEST(RegressionDataValidation, MismatchedRowsAreRejected) {
  RegressionData d{{Matrix(3, 2), Matrix(2, 2)}, Matrix(3, 1)};
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace cope
