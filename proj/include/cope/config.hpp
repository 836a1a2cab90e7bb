#pragma once

// Experiment configuration and runner behind the command-line tool.
//
// A config file is one flat JSON object. Precedence, lowest first: the
// defaults of the command, keys in the file, command-line flags. Unknown keys
// are rejected. Every run writes `config.resolved.json` (all defaults
// materialized) into its output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cope/models.hpp"
#include "cope/train.hpp"

namespace cope {

enum class Command { Verify, TrainRegression, TrainConditional, DegreeReport };

std::string to_string(Command c);
Command command_from_string(const std::string& name);

struct ExperimentConfig {
  Command command = Command::Verify;
  std::uint64_t seed = 0;
  /// Empty: $COPE_OUT/<command> when COPE_OUT is set, else cope_out/<command>.
  std::string output_dir;

  // verify
  std::vector<std::string> suites;

  // model: `blocks` blocks of kind `variant`; block 0 reads every variable,
  // later blocks read the previous output plus (optionally) the conditional
  // variables again.
  std::string variant = "ccp";  // ccp | ncp | spade | additive | pinet | concat_linear
  std::size_t blocks = 1;
  std::vector<std::size_t> orders{3};  // one entry per block, or one for all
  std::size_t rank = 16;
  std::size_t hidden_dim = 16;
  std::size_t omega = 0;  // 0: same as rank
  bool share_conditional = false;
  bool reconsume_conditional = true;
  std::string centering = "none";   // none | batch_mean
  std::string activation = "none";  // none | tanh
  double init_scale = 0.0;          // <= 0: 1/sqrt(rank)
  /// degree-report: probe this checkpoint instead of a fresh model.
  std::string checkpoint;

  // task
  std::string task = "poly_regression";  // poly_regression | downsample_1d | point_cloud
  std::size_t degree = 3;
  std::size_t dim = 2;
  std::size_t out_dim = 1;
  std::size_t samples = 256;
  std::size_t classes = 4;
  double radius = 0.5;
  double stddev = 0.05;
  std::size_t noise_dim = 4;
  std::string noise = "uniform";  // uniform | gaussian
  std::size_t length = 16;
  std::size_t factor = 4;

  // optimizer
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t steps = 20000;
  std::size_t batch_size = 0;  // 0: full batch (regression only)
  std::string schedule = "constant";  // constant | cosine
  double lr_min = 0.0;
  std::size_t log_every = 1;

  // train-regression: optional baseline arm with matched parameter count
  std::string baseline = "none";  // none | additive | concat_linear | pinet
  double target_mse = 0.0;        // > 0: fail when the final MSE exceeds it
  double min_baseline_ratio = 0.0;  // > 0: fail when baseline/main MSE is below it

  // train-conditional
  std::string loss = "mmd";  // mmd | gan
  double diversity_weight = 0.0;
  double diversity_tau = 10.0;
  std::size_t eval_samples = 4000;
  std::size_t sweep_points = 11;
  std::size_t disc_hidden = 32;
  double disc_lr = 2e-3;
  double min_accuracy = 0.95;
  bool require_sweep = true;

  // degree-report
  std::size_t rays = 5;
  std::size_t max_order = 10;
};

/// Defaults for one command (e.g. the conditional run uses two N=2 blocks,
/// tanh output and batches of 128).
ExperimentConfig default_config(Command command);

/// Applies the keys of a flat JSON object over `base`. Throws
/// std::invalid_argument naming the offending key.
ExperimentConfig apply_json(ExperimentConfig base, const nlohmann::json& j);

/// Parses a config file; JSON syntax errors report line and column. The
/// command comes from the file's "command" key unless `command` is given.
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Command> command = std::nullopt);

/// Throws std::invalid_argument naming the first invalid field.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

/// Variable dims and output dim of the configured task.
std::vector<std::size_t> task_variable_dims(const ExperimentConfig& config);
std::size_t task_output_dim(const ExperimentConfig& config);

/// Builds (uninitialized) the configured chain for the task's dims, with
/// `variant` and `rank` overriding the config's.
ModelSpec build_model(const ExperimentConfig& config, const std::string& variant, std::size_t rank);
inline ModelSpec build_model(const ExperimentConfig& config) {
  return build_model(config, config.variant, config.rank);
}

/// Rank for `variant` whose parameter count is closest to `target`
/// (smaller rank on ties).
std::size_t matched_rank(const ExperimentConfig& config, const std::string& variant, std::size_t target);

/// Validates, runs and writes artifacts. Returns 0 iff everything requested
/// passed. Progress and verdicts go to `log`.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace cope
