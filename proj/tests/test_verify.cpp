#include <gtest/gtest.h>

#include <stdexcept>

#include "cope/verify.hpp"

namespace cope {
namespace {

class Suite : public ::testing::TestWithParam<std::string> {};

TEST_P(Suite, PassesAtTheDefaultSeed) {
  const SuiteReport r = run_suite(GetParam(), 0);
  EXPECT_EQ(r.suite, GetParam());
  EXPECT_GT(r.trials, 0u);
  EXPECT_TRUE(r.passed) << r.suite << " max deviation " << r.max_deviation << " tolerance " << r.tolerance;
  EXPECT_LE(r.max_deviation, r.tolerance);
}

TEST_P(Suite, Deterministic) {
  const SuiteReport a = run_suite(GetParam(), 3), b = run_suite(GetParam(), 3);
  EXPECT_EQ(a.trials, b.trials);
  EXPECT_EQ(a.max_deviation, b.max_deviation);
  EXPECT_EQ(a.metrics, b.metrics);
}

INSTANTIATE_TEST_SUITE_P(All, Suite, ::testing::ValuesIn(suite_names()), [](const auto& info) {
  std::string name = info.param;
  for (auto& c : name)
    if (c == '-') c = '_';
  return name;
});

TEST(Suites, NamesCoverEveryInvariant) {
  EXPECT_EQ(suite_names(), (std::vector<std::string>{"claim1-equivalence", "lemma1", "degree-law", "reductions",
                                                     "affineness", "gradients"}));
}

TEST(Suites, UnknownNameListsTheKnownOnes) {
  try {
    run_suite("no-such-suite", 0);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("lemma1"), std::string::npos);
  }
}

TEST(Suites, AffinenessSeparatesTheModels) {
  const SuiteReport r = run_suite("affineness", 0);
  bool found = false;
  for (const auto& [name, value] : r.metrics)
    if (name.find("fraction") != std::string::npos) {
      found = true;
      EXPECT_GE(value, 0.95) << name;
    }
  EXPECT_TRUE(found);
}

TEST(Report, JsonLayout) {
  SuiteReport ok{"lemma1", 100, 1e-15, 1e-10, true, {{"x", 1.0}}, 0.25};
  SuiteReport bad{"claim1-equivalence", 10, 1.0, 1e-9, false, {}, 0.5};
  const auto j = report_json({ok, bad});
  EXPECT_FALSE(j["passed"].get<bool>());
  ASSERT_EQ(j["suites"].size(), 2u);
  EXPECT_EQ(j["suites"][0]["suite"], "lemma1");
  EXPECT_EQ(j["suites"][0]["verdict"], "pass");
  EXPECT_EQ(j["suites"][1]["verdict"], "fail");
  EXPECT_EQ(j["suites"][0]["trials"], 100);
  EXPECT_FALSE(j["suites"][0].contains("seconds"));
  EXPECT_TRUE(report_json({ok})["passed"].get<bool>());
}

}  // namespace
}  // namespace cope
