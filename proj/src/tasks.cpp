#include "cope/tasks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cope/rng.hpp"

namespace cope {

void RegressionData::validate() const {
  if (variables.empty()) throw std::invalid_argument("regression data: no input variables");
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].rows() != targets.rows())
      throw std::invalid_argument("regression data: variable " + std::to_string(i) + " has " +
                                  std::to_string(variables[i].rows()) + " rows, targets have " +
                                  std::to_string(targets.rows()));
  }
  if (targets.rows() == 0) throw std::invalid_argument("regression data: empty");
}

void CondPointCloud::validate() const {
  if (centers.rows() == 0 || centers.cols() != 2) throw std::invalid_argument("point cloud: centers must be K x 2");
  if (!(stddev > 0)) throw std::invalid_argument("point cloud: stddev must be positive");
  for (std::size_t a = 0; a < centers.rows(); ++a)
    for (std::size_t b = a + 1; b < centers.rows(); ++b) {
      const double d = std::hypot(centers(a, 0) - centers(b, 0), centers(a, 1) - centers(b, 1));
      if (d < 4 * stddev)
        throw std::invalid_argument("point cloud: clusters " + std::to_string(a) + " and " + std::to_string(b) +
                                    " are closer than 4 standard deviations");
    }
}

CondPointCloud make_point_cloud(std::size_t classes, double radius, double stddev) {
  if (classes == 0) throw std::invalid_argument("point cloud: need at least one class");
  CondPointCloud task{Matrix(classes, 2), stddev};
  for (std::size_t c = 0; c < classes; ++c) {
    const double angle = std::numbers::pi / 4 + 2 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    task.centers(c, 0) = radius * std::cos(angle);
    task.centers(c, 1) = radius * std::sin(angle);
  }
  task.validate();
  return task;
}

Matrix sample_class(const CondPointCloud& task, std::size_t c, std::size_t n, std::mt19937_64& rng) {
  if (c >= task.classes()) throw std::invalid_argument("sample_class: class " + std::to_string(c) + " out of range");
  Matrix out = sample_normal(n, 2, 0.0, task.stddev, rng);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, 0) += task.centers(c, 0);
    out(i, 1) += task.centers(c, 1);
  }
  return out;
}

std::size_t nearest_center(const CondPointCloud& task, std::span<const double> point) {
  if (point.size() != 2) throw std::invalid_argument("nearest_center: points are 2D");
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t c = 0; c < task.classes(); ++c) {
    const double dx = point[0] - task.centers(c, 0);
    const double dy = point[1] - task.centers(c, 1);
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Matrix one_hot_rows(std::size_t classes, std::size_t c, std::size_t n) {
  if (c >= classes) throw std::invalid_argument("one_hot_rows: class " + std::to_string(c) + " out of range");
  Matrix m(n, classes);
  for (std::size_t i = 0; i < n; ++i) m(i, c) = 1.0;
  return m;
}

PolyRegression make_poly_regression(std::size_t degree, std::size_t dim, std::size_t out_dim, std::size_t samples,
                                    std::mt19937_64& rng) {
  if (samples == 0) throw std::invalid_argument("poly regression: need samples");
  OracleParams target(degree, {dim, dim}, out_dim);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (const TermIndex& idx : target.terms()) {
    auto& t = target.tensor(idx);
    // n + 1 tensors of order n share the degree-n budget.
    const double s = 1.0 / static_cast<double>(idx.n + 1);
    for (auto& v : t.values()) v = s * coef(rng);
  }
  for (auto& b : target.beta()) b = coef(rng);

  PolyRegression task{std::move(target), {}};
  task.data.variables = {sample_uniform(samples, dim, -1, 1, rng), sample_uniform(samples, dim, -1, 1, rng)};
  task.data.targets = Matrix(samples, out_dim);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::vector<Vector> in{Vector(task.data.variables[0].row(i).begin(), task.data.variables[0].row(i).end()),
                                 Vector(task.data.variables[1].row(i).begin(), task.data.variables[1].row(i).end())};
    const Vector y = eval_explicit(task.target, in);
    for (std::size_t j = 0; j < out_dim; ++j) task.data.targets(i, j) = y[j];
  }
  return task;
}

Downsample1D make_downsample_1d(std::size_t length, std::size_t factor, std::size_t noise_dim, std::size_t samples,
                                std::mt19937_64& rng) {
  if (factor == 0 || length == 0 || length % factor != 0)
    throw std::invalid_argument("downsample: length must be a positive multiple of factor");
  if (samples == 0 || noise_dim == 0) throw std::invalid_argument("downsample: need samples and noise_dim >= 1");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  const std::size_t low = length / factor;
  Downsample1D task{length, factor, noise_dim, {}};
  Matrix high(samples, length);
  Matrix coarse(samples, low);
  for (std::size_t i = 0; i < samples; ++i) {
    // Two low harmonics, amplitude kept below 1.
    const double a1 = 0.5 * u(rng), a2 = 0.25 * u(rng), p1 = phase(rng), p2 = phase(rng);
    for (std::size_t t = 0; t < length; ++t) {
      const double x = 2 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(length);
      high(i, t) = a1 * std::sin(x + p1) + a2 * std::sin(2 * x + p2);
    }
    for (std::size_t j = 0; j < low; ++j) {
      double s = 0.0;
      for (std::size_t t = j * factor; t < (j + 1) * factor; ++t) s += high(i, t);
      coarse(i, j) = s / static_cast<double>(factor);
    }
  }
  task.data.variables = {sample_uniform(samples, noise_dim, -1, 1, rng), std::move(coarse)};
  task.data.targets = std::move(high);
  return task;
}

}  // namespace cope
