#pragma once

// Synthetic tasks small enough to train on a desk machine.

#include <cstdint>
#include <random>
#include <vector>

#include "cope/oracle.hpp"
#include "cope/tensor.hpp"

namespace cope {

/// Input variables (one sample per row) paired with regression targets.
struct RegressionData {
  std::vector<Matrix> variables;
  Matrix targets;

  std::size_t samples() const { return targets.rows(); }
  void validate() const;
};

/// K isotropic Gaussian clusters in the plane, centers on a circle.
struct CondPointCloud {
  Matrix centers;  // K x 2
  double stddev;

  std::size_t classes() const { return centers.rows(); }
  /// Pairwise center distance must be at least 4 x stddev.
  void validate() const;
};

CondPointCloud make_point_cloud(std::size_t classes, double radius = 0.5, double stddev = 0.05);
/// n samples of class c, n x 2.
Matrix sample_class(const CondPointCloud& task, std::size_t c, std::size_t n, std::mt19937_64& rng);
std::size_t nearest_center(const CondPointCloud& task, std::span<const double> point);
/// n x K one-hot rows for class c.
Matrix one_hot_rows(std::size_t classes, std::size_t c, std::size_t n);

/// Random explicit polynomial target in two variables plus a fixed dataset
/// drawn uniformly from [-1, 1].
struct PolyRegression {
  OracleParams target;
  RegressionData data;
};

/// Tensor entries are uniform on [-1, 1] divided by the number of terms of
/// each order, so targets stay O(1).
PolyRegression make_poly_regression(std::size_t degree, std::size_t dim, std::size_t out_dim, std::size_t samples,
                                    std::mt19937_64& rng);

/// 1D super-resolution: random smooth signals of length `length` and their
/// block-averaged versions. Variables are (noise, low-res), target is the
/// full signal.
struct Downsample1D {
  std::size_t length;
  std::size_t factor;
  std::size_t noise_dim;
  RegressionData data;
};

Downsample1D make_downsample_1d(std::size_t length, std::size_t factor, std::size_t noise_dim, std::size_t samples,
                                std::mt19937_64& rng);

}  // namespace cope
