// cope: run verification suites, training runs and degree reports.
//
//   cope verify [--suite NAME]... [--seed N] [--out DIR] [--config FILE]
//   cope train-regression [--steps N] ...
//   cope train-conditional [--steps N] ...
//   cope degree-report ...
//
// Flags override keys from --config, which override the command defaults.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cope/config.hpp"
#include "cope/train.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> suites;
  std::optional<std::size_t> steps;
};

void add_flags(CLI::App* sub, Flags& flags, bool suites) {
  sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", flags.seed, "master seed (unsigned 64-bit)");
  sub->add_option("--out", flags.out, "output directory (default $COPE_OUT/<command>)");
  sub->add_option("--steps", flags.steps, "training steps");
  if (suites) sub->add_option("--suite", flags.suites, "suite to run (repeatable; default all)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional polynomial expansion networks: verification and desk-scale training"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<cope::Command> command;
  const std::pair<cope::Command, const char*> commands[] = {
      {cope::Command::Verify, "run the invariant suites and write report.json"},
      {cope::Command::TrainRegression, "fit a random polynomial target, optionally against a baseline"},
      {cope::Command::TrainConditional, "train a class-conditional point-cloud generator"},
      {cope::Command::DegreeReport, "probe the numerical degree of a model along random rays"}};
  for (const auto& [c, help] : commands) {
    CLI::App* sub = app.add_subcommand(cope::to_string(c), help);
    add_flags(sub, flags, c == cope::Command::Verify);
    sub->callback([&command, c = c] { command = c; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    cope::ExperimentConfig config =
        flags.config.empty() ? cope::default_config(*command) : cope::load_config(flags.config, *command);
    if (flags.seed) config.seed = *flags.seed;
    if (!flags.out.empty()) config.output_dir = flags.out;
    if (!flags.suites.empty()) config.suites = flags.suites;
    if (flags.steps) config.steps = *flags.steps;
    return cope::run_experiment(config, std::cout);
  } catch (const cope::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "; partial metrics written\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
