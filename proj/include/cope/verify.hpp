#pragma once

// Randomized invariant suites over the models and the brute-force oracle.
// Each suite draws from its own stream derived from the master seed.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace cope {

struct SuiteReport {
  std::string suite;
  std::size_t trials = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// Suite-specific figures (e.g. fraction of rays that fail affineness).
  std::vector<std::pair<std::string, double>> metrics;
  double seconds = 0.0;
};

/// claim1-equivalence, lemma1, degree-law, reductions, affineness, gradients.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown suite name.
SuiteReport run_suite(const std::string& name, std::uint64_t seed);

/// {"suites": [...], "passed": bool}; timings are left out so the report is
/// reproducible.
nlohmann::json report_json(const std::vector<SuiteReport>& reports);

}  // namespace cope
