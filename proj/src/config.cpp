#include "cope/config.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "cope/checkpoint.hpp"
#include "cope/oracle.hpp"
#include "cope/rng.hpp"
#include "cope/verify.hpp"

namespace cope {

using nlohmann::json;

std::string to_string(Command c) {
  switch (c) {
    case Command::Verify: return "verify";
    case Command::TrainRegression: return "train-regression";
    case Command::TrainConditional: return "train-conditional";
    case Command::DegreeReport: return "degree-report";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::Verify, Command::TrainRegression, Command::TrainConditional, Command::DegreeReport})
    if (to_string(c) == name) return c;
  throw std::invalid_argument("field 'command': unknown command '" + name +
                              "' (expected verify, train-regression, train-conditional or degree-report)");
}

namespace {

// Every configurable field except "command", in resolved-config order.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("seed", c.seed);
  f("output_dir", c.output_dir);
  f("suites", c.suites);
  f("variant", c.variant);
  f("blocks", c.blocks);
  f("orders", c.orders);
  f("rank", c.rank);
  f("hidden_dim", c.hidden_dim);
  f("omega", c.omega);
  f("share_conditional", c.share_conditional);
  f("reconsume_conditional", c.reconsume_conditional);
  f("centering", c.centering);
  f("activation", c.activation);
  f("init_scale", c.init_scale);
  f("checkpoint", c.checkpoint);
  f("task", c.task);
  f("degree", c.degree);
  f("dim", c.dim);
  f("out_dim", c.out_dim);
  f("samples", c.samples);
  f("classes", c.classes);
  f("radius", c.radius);
  f("stddev", c.stddev);
  f("noise_dim", c.noise_dim);
  f("noise", c.noise);
  f("length", c.length);
  f("factor", c.factor);
  f("lr", c.lr);
  f("beta1", c.beta1);
  f("beta2", c.beta2);
  f("eps", c.eps);
  f("steps", c.steps);
  f("batch_size", c.batch_size);
  f("schedule", c.schedule);
  f("lr_min", c.lr_min);
  f("log_every", c.log_every);
  f("baseline", c.baseline);
  f("target_mse", c.target_mse);
  f("min_baseline_ratio", c.min_baseline_ratio);
  f("loss", c.loss);
  f("diversity_weight", c.diversity_weight);
  f("diversity_tau", c.diversity_tau);
  f("eval_samples", c.eval_samples);
  f("sweep_points", c.sweep_points);
  f("disc_hidden", c.disc_hidden);
  f("disc_lr", c.disc_lr);
  f("min_accuracy", c.min_accuracy);
  f("require_sweep", c.require_sweep);
  f("rays", c.rays);
  f("max_order", c.max_order);
}

[[noreturn]] void bad_field(const std::string& key, const std::string& what) {
  throw std::invalid_argument("field '" + key + "': " + what);
}

bool is_count(const json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seed and size fields share one reader");
void read_value(const json& j, const std::string& key, std::size_t& out) {
  if (!is_count(j)) bad_field(key, "expected a non-negative integer");
  out = j.get<std::size_t>();
}
void read_value(const json& j, const std::string& key, double& out) {
  if (!j.is_number()) bad_field(key, "expected a number");
  out = j.get<double>();
}
void read_value(const json& j, const std::string& key, bool& out) {
  if (!j.is_boolean()) bad_field(key, "expected true or false");
  out = j.get<bool>();
}
void read_value(const json& j, const std::string& key, std::string& out) {
  if (!j.is_string()) bad_field(key, "expected a string");
  out = j.get<std::string>();
}
void read_value(const json& j, const std::string& key, std::vector<std::string>& out) {
  if (j.is_string()) {
    out = {j.get<std::string>()};
    return;
  }
  if (!j.is_array()) bad_field(key, "expected a string or a list of strings");
  out.clear();
  for (const auto& e : j) {
    if (!e.is_string()) bad_field(key, "expected a list of strings");
    out.push_back(e.get<std::string>());
  }
}
// A single integer stands for a one-element list.
void read_value(const json& j, const std::string& key, std::vector<std::size_t>& out) {
  if (is_count(j)) {
    out = {j.get<std::size_t>()};
    return;
  }
  if (!j.is_array()) bad_field(key, "expected a non-negative integer or a list of them");
  out.clear();
  for (const auto& e : j) {
    if (!is_count(e)) bad_field(key, "expected a list of non-negative integers");
    out.push_back(e.get<std::size_t>());
  }
}

void require_one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (value == a) return;
    list += (list.empty() ? "" : ", ") + std::string(a);
  }
  bad_field(key, "unknown value '" + value + "' (expected one of " + list + ")");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) bad_field(key, what);
}

BlockKind kind_of(const std::string& variant) { return block_kind_from_string(variant); }

std::size_t order_of(const ExperimentConfig& c, std::size_t block) {
  return c.orders.size() == 1 ? c.orders.front() : c.orders.at(block);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

InitOptions init_options(const ExperimentConfig& c) { return {.scale = c.init_scale}; }

}  // namespace

ExperimentConfig default_config(Command command) {
  ExperimentConfig c;
  c.command = command;
  switch (command) {
    case Command::Verify:
      c.suites = suite_names();
      break;
    case Command::TrainRegression:
      c.baseline = "additive";
      c.target_mse = 1e-4;
      c.min_baseline_ratio = 100.0;
      break;
    case Command::TrainConditional:
      c.blocks = 2;
      c.orders = {2};
      c.activation = "tanh";
      c.task = "point_cloud";
      c.steps = 1500;
      c.batch_size = 128;
      break;
    case Command::DegreeReport:
      c.blocks = 2;
      c.orders = {2};
      c.rank = 8;
      c.hidden_dim = 4;
      break;
  }
  return c;
}

ExperimentConfig apply_json(ExperimentConfig base, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object at the top level");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      if (!value.is_string()) bad_field(key, "expected a string");
      if (command_from_string(value.get<std::string>()) != base.command)
        bad_field(key, "'" + value.get<std::string>() + "' conflicts with the requested command '" +
                           to_string(base.command) + "'");
      continue;
    }
    bool found = false;
    visit_fields(base, [&](const char* name, auto& field) {
      if (!found && key == name) {
        read_value(value, key, field);
        found = true;
      }
    });
    if (!found) throw std::invalid_argument("unknown key '" + key + "'");
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Command> command) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports "line L, column C" in the message.
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  if (!command) {
    if (!j.is_object() || !j.contains("command") || !j["command"].is_string())
      throw std::invalid_argument("config " + path.string() + ": field 'command' is required");
    command = command_from_string(j["command"].get<std::string>());
  }
  try {
    return apply_json(default_config(*command), j);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& config) {
  json j;
  j["command"] = to_string(config.command);
  visit_fields(config, [&](const char* name, const auto& field) { j[name] = field; });
  return j;
}

void validate(const ExperimentConfig& c) {
  for (const auto& s : c.suites) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), s) == names.end()) bad_field("suites", "unknown suite '" + s + "'");
  }
  if (c.command == Command::Verify) require(!c.suites.empty(), "suites", "must name at least one suite");

  require_one_of("variant", c.variant, {"ccp", "ncp", "spade", "additive", "pinet", "concat_linear"});
  require(c.blocks >= 1, "blocks", "must be at least 1");
  require(c.orders.size() == 1 || c.orders.size() == c.blocks, "orders",
          "needs one entry or one per block (" + std::to_string(c.blocks) + ")");
  for (std::size_t n : c.orders) require(n >= 1, "orders", "every order must be at least 1");
  require(c.rank >= 1, "rank", "must be at least 1");
  require(c.hidden_dim >= 1, "hidden_dim", "must be at least 1");
  require_one_of("centering", c.centering, {"none", "batch_mean"});
  require_one_of("activation", c.activation, {"none", "tanh"});
  require(std::isfinite(c.init_scale), "init_scale", "must be finite");

  require_one_of("task", c.task, {"poly_regression", "downsample_1d", "point_cloud"});
  if (c.command == Command::TrainConditional)
    require(c.task == "point_cloud", "task", "train-conditional needs the point_cloud task");
  if (c.command == Command::TrainRegression || c.command == Command::DegreeReport)
    require(c.task != "point_cloud", "task", to_string(c.command) + " needs a regression task");
  if (c.task == "poly_regression") {
    require(c.degree >= 1 && c.degree <= kOracleMaxOrder, "degree",
            "must be in [1, " + std::to_string(kOracleMaxOrder) + "]");
    require(c.dim >= 1 && c.dim <= kOracleMaxDim, "dim", "must be in [1, " + std::to_string(kOracleMaxDim) + "]");
    require(c.out_dim >= 1 && c.out_dim <= kOracleMaxDim, "out_dim",
            "must be in [1, " + std::to_string(kOracleMaxDim) + "]");
  }
  require(c.samples >= 1, "samples", "must be at least 1");
  require(c.classes >= 1, "classes", "must be at least 1");
  require(c.radius > 0, "radius", "must be positive");
  require(c.stddev > 0, "stddev", "must be positive");
  require(c.noise_dim >= 1, "noise_dim", "must be at least 1");
  require_one_of("noise", c.noise, {"uniform", "gaussian"});
  require(c.factor >= 1, "factor", "must be at least 1");
  require(c.length >= 1 && c.length % c.factor == 0, "length", "must be a positive multiple of factor");

  require(c.lr > 0, "lr", "must be positive");
  require(c.beta1 >= 0 && c.beta1 < 1, "beta1", "must be in [0, 1)");
  require(c.beta2 >= 0 && c.beta2 < 1, "beta2", "must be in [0, 1)");
  require(c.eps > 0, "eps", "must be positive");
  require_one_of("schedule", c.schedule, {"constant", "cosine"});
  require(c.lr_min >= 0 && c.lr_min <= c.lr, "lr_min", "must be in [0, lr]");
  require(c.log_every >= 1, "log_every", "must be at least 1");

  require_one_of("baseline", c.baseline, {"none", "additive", "concat_linear", "pinet"});
  require(c.target_mse >= 0, "target_mse", "must be non-negative");
  require(c.min_baseline_ratio >= 0, "min_baseline_ratio", "must be non-negative");

  require_one_of("loss", c.loss, {"mmd", "gan"});
  require(c.diversity_weight >= 0, "diversity_weight", "must be non-negative");
  require(c.diversity_tau > 0, "diversity_tau", "must be positive");
  require(c.eval_samples >= c.classes, "eval_samples", "needs at least one sample per class");
  require(c.sweep_points >= 2, "sweep_points", "must be at least 2");
  require(c.disc_hidden >= 1, "disc_hidden", "must be at least 1");
  require(c.disc_lr > 0, "disc_lr", "must be positive");
  require(c.min_accuracy >= 0 && c.min_accuracy <= 1, "min_accuracy", "must be in [0, 1]");
  if (c.command == Command::TrainConditional)
    require(c.batch_size >= 2 * c.classes, "batch_size", "needs at least 2 samples per class");

  require(c.rays >= 1, "rays", "must be at least 1");
  require(c.max_order >= 1 && c.max_order <= 12, "max_order", "must be in [1, 12]");

  if (c.command != Command::Verify && c.checkpoint.empty()) {
    try {
      build_model(c).validate();
    } catch (const std::invalid_argument& e) {
      bad_field("variant", std::string("model does not fit the task: ") + e.what());
    }
  }
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  const char* root = std::getenv("COPE_OUT");
  return std::filesystem::path(root && *root ? root : "cope_out") / to_string(config.command);
}

std::vector<std::size_t> task_variable_dims(const ExperimentConfig& c) {
  if (c.task == "point_cloud") return {c.noise_dim, c.classes};
  if (c.task == "downsample_1d") return {c.noise_dim, c.length / c.factor};
  return {c.dim, c.dim};
}

std::size_t task_output_dim(const ExperimentConfig& c) {
  if (c.task == "point_cloud") return 2;
  if (c.task == "downsample_1d") return c.length;
  return c.out_dim;
}

ModelSpec build_model(const ExperimentConfig& c, const std::string& variant, std::size_t rank) {
  const BlockKind kind = kind_of(variant);
  ModelSpec spec;
  spec.variable_dims = task_variable_dims(c);
  spec.output_activation = c.activation == "tanh" ? Activation::Tanh : Activation::None;
  spec.centering = c.centering == "batch_mean" ? Centering::BatchMean : Centering::None;
  std::size_t prev = 0;
  for (std::size_t b = 0; b < c.blocks; ++b) {
    const std::size_t out = b + 1 == c.blocks ? task_output_dim(c) : c.hidden_dim;
    BlockInputs in;
    std::vector<std::size_t> dims;
    if (b == 0) {
      for (std::size_t v = 0; v < spec.variable_dims.size(); ++v) in.variables.push_back(v);
    } else {
      in.previous = true;
      dims.push_back(prev);
      if (c.reconsume_conditional)
        for (std::size_t v = 1; v < spec.variable_dims.size(); ++v) in.variables.push_back(v);
    }
    for (std::size_t v : in.variables) dims.push_back(spec.variable_dims[v]);
    std::size_t total = 0;
    for (std::size_t d : dims) total += d;

    const std::size_t order = order_of(c, b);
    switch (kind) {
      case BlockKind::PiNet:
        spec.chain.push_back(Block{kind, PiNetParams(order, total, rank, out), in});
        break;
      case BlockKind::ConcatLinear:
        spec.chain.push_back(Block{kind, ConcatParams(total, out), in});
        break;
      default: {
        const Variant v = kind == BlockKind::Ccp ? Variant::Ccp : Variant::Ncp;
        spec.chain.push_back(Block{kind, CopeParams(v, order, dims, rank, out, c.omega, c.share_conditional), in});
      }
    }
    prev = out;
  }
  return spec;
}

std::size_t matched_rank(const ExperimentConfig& config, const std::string& variant, std::size_t target) {
  std::size_t best = 1, best_gap = SIZE_MAX;
  for (std::size_t k = 1; k <= 4 * std::max<std::size_t>(config.rank, 16); ++k) {
    const std::size_t count = build_model(config, variant, k).parameter_count();
    const std::size_t gap = count > target ? count - target : target - count;
    if (gap < best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  return best;
}

namespace {

RegressionData make_regression_data(const ExperimentConfig& c) {
  auto rng = make_stream(c.seed, "task");
  if (c.task == "downsample_1d") return make_downsample_1d(c.length, c.factor, c.noise_dim, c.samples, rng).data;
  return make_poly_regression(c.degree, c.dim, c.out_dim, c.samples, rng).data;
}

RegressionOptions regression_options(const ExperimentConfig& c) {
  RegressionOptions o;
  o.steps = c.steps;
  o.batch_size = c.batch_size;
  o.adam = {c.lr, c.beta1, c.beta2, c.eps};
  o.schedule = c.schedule == "cosine" ? LrSchedule::Cosine : LrSchedule::Constant;
  o.lr_min = c.lr_min;
  o.log_every = c.log_every;
  o.seed = c.seed;
  return o;
}

// Trains one arm; on divergence the partial trace is still written.
RegressionResult fit_arm(const RegressionData& data, ModelSpec& model, const RegressionOptions& opt,
                         const std::filesystem::path& metrics_path) {
  try {
    RegressionResult r = train_regression(data, model, opt);
    r.trace.write_csv(metrics_path);
    return r;
  } catch (const TrainingDiverged& e) {
    e.trace().write_csv(metrics_path);
    throw;
  }
}

int run_verify(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  std::vector<SuiteReport> reports;
  MetricsTrace table;
  table.columns = {"suite_index", "trials", "max_deviation", "tolerance", "passed"};
  for (std::size_t i = 0; i < c.suites.size(); ++i) {
    SuiteReport r = run_suite(c.suites[i], c.seed);
    log << (r.passed ? "PASS " : "FAIL ") << r.suite << ": trials=" << r.trials
        << " max_deviation=" << format_double(r.max_deviation) << " tolerance=" << format_double(r.tolerance)
        << " (" << r.seconds << " s)\n";
    table.add({static_cast<double>(i), static_cast<double>(r.trials), r.max_deviation, r.tolerance, r.passed ? 1.0 : 0.0});
    reports.push_back(std::move(r));
  }
  const json report = report_json(reports);
  write_file(out / "report.json", dump(report));
  table.write_csv(out / "metrics.csv");
  if (!report["passed"].get<bool>()) {
    for (const auto& r : reports)
      if (!r.passed) log << "verification failed: " << r.suite << "\n";
    return 1;
  }
  return 0;
}

int run_train_regression(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const RegressionData data = make_regression_data(c);
  const RegressionOptions opt = regression_options(c);

  ModelSpec model = build_model(c);
  auto init = make_stream(c.seed, "init");
  initialize(model, init, init_options(c));
  log << "model: " << c.variant << ", " << model.parameter_count() << " parameters\n";
  const RegressionResult main = fit_arm(data, model, opt, out / "metrics.csv");
  save_checkpoint(model, out / "checkpoint.json");
  log << "final MSE " << format_double(main.final_mse) << "\n";

  json summary{{"variant", c.variant}, {"parameters", model.parameter_count()}, {"final_mse", main.final_mse}};
  bool ok = c.target_mse <= 0 || main.final_mse < c.target_mse;
  if (c.target_mse > 0)
    log << (main.final_mse < c.target_mse ? "PASS" : "FAIL") << " final MSE below " << format_double(c.target_mse)
        << "\n";

  if (c.baseline != "none") {
    const std::size_t k = matched_rank(c, c.baseline, model.parameter_count());
    ModelSpec base = build_model(c, c.baseline, k);
    auto binit = make_stream(c.seed, "init-baseline");
    initialize(base, binit, init_options(c));
    log << "baseline: " << c.baseline << " rank " << k << ", " << base.parameter_count() << " parameters\n";
    const RegressionResult b = fit_arm(data, base, opt, out / "metrics_baseline.csv");
    save_checkpoint(base, out / "checkpoint_baseline.json");
    const double ratio = main.final_mse > 0 ? b.final_mse / main.final_mse : INFINITY;
    log << "baseline final MSE " << format_double(b.final_mse) << " (ratio " << format_double(ratio) << ")\n";
    summary["baseline"] = {{"variant", c.baseline},
                           {"rank", k},
                           {"parameters", base.parameter_count()},
                           {"final_mse", b.final_mse},
                           {"ratio", std::isfinite(ratio) ? json(ratio) : json("inf")}};
    if (c.min_baseline_ratio > 0) {
      const bool gap = ratio >= c.min_baseline_ratio;
      log << (gap ? "PASS" : "FAIL") << " baseline MSE at least " << format_double(c.min_baseline_ratio)
          << "x the main model's\n";
      ok = ok && gap;
    }
  }
  summary["passed"] = ok;
  write_file(out / "summary.json", dump(summary));
  return ok ? 0 : 1;
}

int run_train_conditional(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  const CondPointCloud task = make_point_cloud(c.classes, c.radius, c.stddev);
  ModelSpec model = build_model(c);
  auto init = make_stream(c.seed, "init");
  initialize(model, init, init_options(c));

  ConditionalOptions opt;
  opt.loss = c.loss == "gan" ? GeneratorLoss::Gan : GeneratorLoss::Mmd;
  opt.noise = c.noise == "gaussian" ? NoiseKind::Gaussian : NoiseKind::Uniform;
  opt.steps = c.steps;
  opt.batch_size = c.batch_size;
  opt.adam = {c.lr, c.beta1, c.beta2, c.eps};
  opt.diversity_weight = c.diversity_weight;
  opt.diversity_tau = c.diversity_tau;
  opt.disc_hidden = c.disc_hidden;
  opt.disc_adam.lr = c.disc_lr;
  opt.eval_samples = c.eval_samples;
  opt.sweep_points = c.sweep_points;
  opt.log_every = c.log_every;
  opt.seed = c.seed;

  log << "generator: " << c.blocks << " " << c.variant << " block(s), " << model.parameter_count()
      << " parameters, loss " << c.loss << "\n";
  ConditionalResult r;
  try {
    r = train_conditional_generator(task, model, opt);
  } catch (const TrainingDiverged& e) {
    e.trace().write_csv(out / "metrics.csv");
    throw;
  }
  r.trace.write_csv(out / "metrics.csv");
  write_file(out / "samples.csv", samples_csv(r.samples));
  write_file(out / "sweep.csv", sweep_csv(r.sweep));
  save_checkpoint(model, out / "checkpoint.json");

  const bool acc_ok = r.accuracy >= c.min_accuracy;
  const bool sweep_ok = !c.require_sweep || r.sweep_ok;
  log << (acc_ok ? "PASS" : "FAIL") << " class accuracy " << format_double(r.accuracy) << " (need "
      << format_double(c.min_accuracy) << ")\n";
  log << (sweep_ok ? "PASS" : "FAIL") << " sweep endpoints " << (r.sweep_ok ? "on" : "off") << " their classes\n";

  json means = json::array();
  for (std::size_t k = 0; k < task.classes(); ++k) means.push_back({r.class_means(k, 0), r.class_means(k, 1)});
  write_file(out / "summary.json", dump({{"accuracy", r.accuracy},
                                         {"sweep_ok", r.sweep_ok},
                                         {"class_means", means},
                                         {"passed", acc_ok && sweep_ok}}));
  return acc_ok && sweep_ok ? 0 : 1;
}

int run_degree_report(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  ModelSpec model;
  if (!c.checkpoint.empty()) {
    model = load_checkpoint(c.checkpoint);
  } else {
    model = build_model(c);
    auto init = make_stream(c.seed, "init");
    initialize(model, init, init_options(c));
  }
  const auto& dims = model.variable_dims;
  std::size_t n = 0;
  for (std::size_t d : dims) n += d;
  auto f = [&](std::span<const double> x) {
    std::vector<Vector> in;
    std::size_t off = 0;
    for (std::size_t d : dims) {
      in.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(off), x.begin() + static_cast<std::ptrdiff_t>(off + d));
      off += d;
    }
    return product_compose(model, std::span<const Vector>(in));
  };

  auto rng = make_stream(c.seed, "rays");
  MetricsTrace table;
  table.columns = {"ray", "variable", "degree", "saturated"};  // variable -1: all at once
  std::vector<std::size_t> max_degree(dims.size() + 1, 0);
  for (std::size_t ray = 0; ray < c.rays; ++ray) {
    const Vector base = sample_uniform_vector(n, -1, 1, rng);
    for (std::size_t v = 0; v <= dims.size(); ++v) {
      Vector dir = sample_uniform_vector(n, -1, 1, rng);
      if (v > 0) {
        // Only variable v - 1 moves.
        std::size_t off = 0;
        for (std::size_t u = 0; u < dims.size(); ++u) {
          if (u != v - 1) std::fill_n(dir.begin() + static_cast<std::ptrdiff_t>(off), dims[u], 0.0);
          off += dims[u];
        }
      }
      const DegreeReport d = degree_probe(f, base, dir, c.max_order);
      table.add({static_cast<double>(ray), static_cast<double>(v) - 1.0, static_cast<double>(d.degree),
                 d.saturated ? 1.0 : 0.0});
      max_degree[v] = std::max(max_degree[v], d.degree);
    }
  }
  table.write_csv(out / "metrics.csv");
  json per_variable = json::array();
  for (std::size_t v = 0; v < dims.size(); ++v) per_variable.push_back(max_degree[v + 1]);
  log << "total degree " << max_degree[0] << "; per variable";
  for (std::size_t v = 0; v < dims.size(); ++v) log << " " << max_degree[v + 1];
  log << "\n";
  write_file(out / "summary.json", dump({{"total_degree", max_degree[0]}, {"per_variable_degree", per_variable}}));
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  const std::filesystem::path out = resolve_output_dir(config);
  std::filesystem::create_directories(out);
  write_file(out / "config.resolved.json", dump(to_json(config)));
  log << to_string(config.command) << " (seed " << config.seed << ") -> " << out.string() << "\n";
  switch (config.command) {
    case Command::Verify: return run_verify(config, out, log);
    case Command::TrainRegression: return run_train_regression(config, out, log);
    case Command::TrainConditional: return run_train_conditional(config, out, log);
    case Command::DegreeReport: return run_degree_report(config, out, log);
  }
  return 1;
}

}  // namespace cope
