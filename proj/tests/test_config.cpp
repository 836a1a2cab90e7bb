#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cope/checkpoint.hpp"
#include "cope/config.hpp"

namespace cope {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cope_config_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string validation_error(const ExperimentConfig& c) {
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

TEST(Command, NamesRoundTrip) {
  for (Command c : {Command::Verify, Command::TrainRegression, Command::TrainConditional, Command::DegreeReport})
    EXPECT_EQ(command_from_string(to_string(c)), c);
  EXPECT_THROW(command_from_string("train"), std::invalid_argument);
}

TEST(Defaults, AreValidForEveryCommand) {
  for (Command c : {Command::Verify, Command::TrainRegression, Command::TrainConditional, Command::DegreeReport})
    EXPECT_EQ(validation_error(default_config(c)), "") << to_string(c);
}

TEST(Defaults, MatchTheDocumentedExperiments) {
  const ExperimentConfig reg = default_config(Command::TrainRegression);
  EXPECT_EQ(reg.variant, "ccp");
  EXPECT_EQ(reg.orders, std::vector<std::size_t>{3});
  EXPECT_EQ(reg.rank, 16u);
  EXPECT_EQ(reg.degree, 3u);
  EXPECT_EQ(reg.dim, 2u);
  EXPECT_EQ(reg.steps, 20000u);
  EXPECT_EQ(reg.baseline, "additive");

  const ExperimentConfig cond = default_config(Command::TrainConditional);
  EXPECT_EQ(cond.blocks, 2u);
  EXPECT_EQ(cond.orders, std::vector<std::size_t>{2});
  EXPECT_EQ(cond.activation, "tanh");
  EXPECT_EQ(cond.noise, "uniform");
  EXPECT_EQ(cond.batch_size, 128u);
  EXPECT_EQ(cond.eval_samples, 4000u);
}

TEST(Validate, ZeroRankNamesTheField) {
  ExperimentConfig c = default_config(Command::TrainRegression);
  c.rank = 0;
  EXPECT_NE(validation_error(c).find("'rank'"), std::string::npos) << validation_error(c);
}

TEST(Validate, OtherFieldsAreNamed) {
  ExperimentConfig c = default_config(Command::TrainConditional);
  c.loss = "wasserstein";
  EXPECT_NE(validation_error(c).find("'loss'"), std::string::npos);
  c = default_config(Command::TrainConditional);
  c.orders = {2, 2, 2};
  EXPECT_NE(validation_error(c).find("'orders'"), std::string::npos);
  c = default_config(Command::Verify);
  c.suites = {"bogus"};
  EXPECT_NE(validation_error(c).find("'suites'"), std::string::npos);
  c = default_config(Command::TrainRegression);
  c.lr = 0;
  EXPECT_NE(validation_error(c).find("'lr'"), std::string::npos);
}

TEST(ApplyJson, OverridesAndRejectsUnknownKeys) {
  const ExperimentConfig c = apply_json(default_config(Command::TrainRegression),
                                        json{{"rank", 4}, {"orders", 2}, {"seed", 12345678901234567ULL}});
  EXPECT_EQ(c.rank, 4u);
  EXPECT_EQ(c.orders, std::vector<std::size_t>{2});
  EXPECT_EQ(c.seed, 12345678901234567ULL);
  EXPECT_EQ(apply_json(c, json{{"orders", {2, 3}}, {"blocks", 2}}).orders, (std::vector<std::size_t>{2, 3}));

  try {
    apply_json(c, json{{"rnak", 4}});
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()), "unknown key 'rnak'");
  }
}

TEST(ApplyJson, TypeErrorsNameTheField) {
  try {
    apply_json(default_config(Command::Verify), json{{"rank", "big"}});
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'rank'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_json(default_config(Command::Verify), json{{"rank", -1}}), std::invalid_argument);
  EXPECT_THROW(apply_json(default_config(Command::Verify), json{{"lr", "fast"}}), std::invalid_argument);
  EXPECT_THROW(apply_json(default_config(Command::Verify), json::array()), std::invalid_argument);
}

TEST(ApplyJson, CommandKeyMustAgree) {
  const ExperimentConfig base = default_config(Command::Verify);
  EXPECT_NO_THROW(apply_json(base, json{{"command", "verify"}}));
  EXPECT_THROW(apply_json(base, json{{"command", "train-regression"}}), std::invalid_argument);
}

TEST(ToJson, RoundTripsEveryField) {
  ExperimentConfig c = default_config(Command::TrainConditional);
  c.seed = 99;
  c.orders = {3, 2};
  c.diversity_weight = 0.125;
  const json j = to_json(c);
  EXPECT_EQ(to_json(apply_json(default_config(Command::TrainConditional), j)), j);
  EXPECT_EQ(j["command"], "train-conditional");
  EXPECT_TRUE(j.contains("min_accuracy"));
}

TEST(LoadConfig, ReportsSyntaxErrorPosition) {
  const fs::path dir = scratch_dir("syntax");
  std::ofstream(dir / "bad.json") << "{\n  \"rank\": 4,\n  \"lr\": 0.1\n  \"steps\": 3\n}\n";
  try {
    load_config(dir / "bad.json", Command::TrainRegression);
    FAIL() << "expected a parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(LoadConfig, CommandFromFileOrArgument) {
  const fs::path dir = scratch_dir("command");
  std::ofstream(dir / "c.json") << R"({"command": "degree-report", "rays": 2})";
  std::ofstream(dir / "nocmd.json") << R"({"rays": 2})";
  EXPECT_EQ(load_config(dir / "c.json").command, Command::DegreeReport);
  EXPECT_EQ(load_config(dir / "c.json").rays, 2u);
  EXPECT_THROW(load_config(dir / "nocmd.json"), std::invalid_argument);
  EXPECT_EQ(load_config(dir / "nocmd.json", Command::DegreeReport).rays, 2u);
  EXPECT_THROW(load_config(dir / "missing.json", Command::Verify), std::invalid_argument);
}

TEST(OutputDir, EnvironmentRoot) {
  ExperimentConfig c = default_config(Command::Verify);
  c.output_dir = "explicit";
  EXPECT_EQ(resolve_output_dir(c), fs::path("explicit"));
  c.output_dir.clear();
  setenv("COPE_OUT", "/tmp/cope-root", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/cope-root/verify"));
  unsetenv("COPE_OUT");
  EXPECT_EQ(resolve_output_dir(c), fs::path("cope_out/verify"));
}

TEST(BuildModel, ChainsBlocksAndReconsumesTheConditional) {
  ExperimentConfig c = default_config(Command::TrainConditional);
  ModelSpec m = build_model(c);
  ASSERT_EQ(m.chain.size(), 2u);
  EXPECT_EQ(m.variable_dims, (std::vector<std::size_t>{c.noise_dim, c.classes}));
  EXPECT_EQ(m.chain[0].inputs.variables, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(m.chain[1].inputs.previous);
  EXPECT_EQ(m.chain[1].inputs.variables, std::vector<std::size_t>{1});
  EXPECT_EQ(m.output_activation, Activation::Tanh);
  EXPECT_EQ(m.output_dim(), 2u);
  c.reconsume_conditional = false;
  EXPECT_TRUE(build_model(c).chain[1].inputs.variables.empty());
}

TEST(BuildModel, MatchedRankMinimizesTheParameterGap) {
  const ExperimentConfig c = default_config(Command::TrainRegression);
  const std::size_t target = build_model(c).parameter_count();
  const std::size_t k = matched_rank(c, "additive", target);
  const auto gap = [&](std::size_t rank) {
    const auto n = static_cast<long long>(build_model(c, "additive", rank).parameter_count());
    return std::llabs(n - static_cast<long long>(target));
  };
  EXPECT_LE(gap(k), gap(k + 1));
  if (k > 1) {
    EXPECT_LE(gap(k), gap(k - 1));
  }
}

TEST(RunExperiment, VerifyWritesReportAndResolvedConfig) {
  ExperimentConfig c = default_config(Command::Verify);
  c.suites = {"lemma1", "reductions"};
  c.output_dir = scratch_dir("verify").string();
  std::ostringstream log;
  EXPECT_EQ(run_experiment(c, log), 0) << log.str();
  const fs::path out = c.output_dir;
  const json report = json::parse(read_file(out / "report.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
  ASSERT_EQ(report["suites"].size(), 2u);
  for (const auto& s : report["suites"]) {
    for (const char* key : {"suite", "trials", "max_deviation", "tolerance", "verdict"}) EXPECT_TRUE(s.contains(key));
  }
  const json resolved = json::parse(read_file(out / "config.resolved.json"));
  EXPECT_EQ(resolved["suites"], json({"lemma1", "reductions"}));
  EXPECT_TRUE(resolved.contains("lr"));
  EXPECT_TRUE(fs::exists(out / "metrics.csv"));
}

TEST(RunExperiment, InvalidConfigIsRejectedBeforeRunning) {
  ExperimentConfig c = default_config(Command::TrainRegression);
  c.rank = 0;
  c.output_dir = scratch_dir("invalid").string();
  std::ostringstream log;
  EXPECT_THROW(run_experiment(c, log), std::invalid_argument);
  EXPECT_FALSE(fs::exists(fs::path(c.output_dir) / "metrics.csv"));
}

TEST(RunExperiment, RegressionArtifactsAreReproducible) {
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    ExperimentConfig c = default_config(Command::TrainRegression);
    c.steps = 50;
    c.samples = 32;
    c.rank = 4;
    c.target_mse = 0;
    c.min_baseline_ratio = 0;
    c.output_dir = scratch_dir("regression" + std::to_string(run)).string();
    std::ostringstream log;
    EXPECT_EQ(run_experiment(c, log), 0) << log.str();
    const fs::path out = c.output_dir;
    for (const char* f : {"metrics.csv", "checkpoint.json", "metrics_baseline.csv", "checkpoint_baseline.json",
                          "summary.json", "config.resolved.json"})
      EXPECT_TRUE(fs::exists(out / f)) << f;
    EXPECT_NO_THROW(load_checkpoint(out / "checkpoint.json"));
    csv[run] = read_file(out / "metrics.csv");
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(csv[0].substr(0, 13), "step,loss,lr\n");
}

TEST(RunExperiment, FailedTargetGivesNonZeroStatus) {
  ExperimentConfig c = default_config(Command::TrainRegression);
  c.steps = 2;
  c.samples = 16;
  c.baseline = "none";
  c.target_mse = 1e-12;
  c.output_dir = scratch_dir("target").string();
  std::ostringstream log;
  EXPECT_NE(run_experiment(c, log), 0);
}

TEST(RunExperiment, DegreeReportOnACheckpoint) {
  const fs::path dir = scratch_dir("degree");
  ExperimentConfig c = default_config(Command::DegreeReport);
  c.output_dir = (dir / "fresh").string();
  std::ostringstream log;
  EXPECT_EQ(run_experiment(c, log), 0) << log.str();
  const json summary = json::parse(read_file(dir / "fresh" / "summary.json"));
  EXPECT_EQ(summary["total_degree"], 4);
  EXPECT_EQ(summary["per_variable_degree"], json({4, 4}));

  // A single N=3 CCP block saved and re-probed.
  ExperimentConfig train = default_config(Command::TrainRegression);
  train.steps = 1;
  train.samples = 8;
  train.baseline = "none";
  train.target_mse = 0;
  train.output_dir = (dir / "train").string();
  EXPECT_EQ(run_experiment(train, log), 0);
  c.checkpoint = (dir / "train" / "checkpoint.json").string();
  c.output_dir = (dir / "probe").string();
  EXPECT_EQ(run_experiment(c, log), 0) << log.str();
  const std::string metrics = read_file(dir / "probe" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, 39), "ray,variable,degree,saturated\n0,-1,3,0\n");
}

}  // namespace
}  // namespace cope
