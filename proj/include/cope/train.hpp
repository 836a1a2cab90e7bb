#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cope/models.hpp"
#include "cope/optim.hpp"
#include "cope/tasks.hpp"

namespace cope {

/// Rows of numbers under a header, written as CSV with shortest round-trip
/// formatting (locale independent). The first column is the step.
struct MetricsTrace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Shortest decimal string that parses back to `x`.
std::string format_double(double x);

/// Thrown when the loss becomes non-finite; carries the trace so far.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t step, MetricsTrace trace);
  std::size_t step() const { return step_; }
  const MetricsTrace& trace() const { return trace_; }

 private:
  std::size_t step_;
  MetricsTrace trace_;
};

enum class LrSchedule { Constant, Cosine };

struct RegressionOptions {
  std::size_t steps = 20000;
  /// 0 trains on the full dataset every step.
  std::size_t batch_size = 0;
  AdamConfig adam;
  LrSchedule schedule = LrSchedule::Constant;
  /// Final learning rate of the cosine schedule.
  double lr_min = 0.0;
  std::size_t log_every = 1;
  std::uint64_t seed = 0;
};

struct RegressionResult {
  MetricsTrace trace;  // step, loss, lr
  double final_mse = 0.0;
};

/// Fits `model` to the data with Adam on the MSE loss. Throws
/// TrainingDiverged on a non-finite loss.
RegressionResult train_regression(const RegressionData& data, ModelSpec& model, const RegressionOptions& opt);

enum class GeneratorLoss { Mmd, Gan };
enum class NoiseKind { Uniform, Gaussian };

struct ConditionalOptions {
  GeneratorLoss loss = GeneratorLoss::Mmd;
  NoiseKind noise = NoiseKind::Uniform;
  std::size_t steps = 1500;
  /// Split evenly across classes.
  std::size_t batch_size = 128;
  AdamConfig adam;
  /// Weight of the (maximized) diversity term; 0 disables it.
  double diversity_weight = 0.0;
  double diversity_tau = 10.0;
  /// GAN path only.
  std::size_t disc_hidden = 32;
  AdamConfig disc_adam{.lr = 2e-3, .beta1 = 0.5};
  std::size_t eval_samples = 4000;
  std::size_t sweep_points = 11;
  std::size_t log_every = 1;
  std::uint64_t seed = 0;
};

struct SampleRow {
  std::size_t cls;
  double x;
  double y;
};

/// One point of the fixed-noise sweep between the one-hot codes of `from`
/// and `to`: class input (1 - alpha) e_from + alpha e_to.
struct SweepRow {
  std::size_t from;
  std::size_t to;
  double alpha;
  double x;
  double y;
  std::size_t nearest;
};

struct ConditionalResult {
  MetricsTrace trace;
  std::vector<SampleRow> samples;
  std::vector<SweepRow> sweep;
  /// Fraction of samples whose nearest center is their conditioning class.
  double accuracy = 0.0;
  /// Every sweep endpoint lands on its endpoint class.
  bool sweep_ok = false;
  Matrix class_means;  // K x 2
};

/// Trains a generator taking (noise, one-hot class) to match the point
/// cloud, then samples it. Noise dim is the model's first variable dim.
ConditionalResult train_conditional_generator(const CondPointCloud& task, ModelSpec& model,
                                              const ConditionalOptions& opt);

std::string samples_csv(const std::vector<SampleRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace cope
