#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <regex>

#include "cope/checkpoint.hpp"
#include "test_util.hpp"

namespace cope {
namespace {

// One block of every kind, chained, with awkward values.
ModelSpec every_kind_model(std::mt19937_64& rng) {
  ModelSpec spec;
  spec.variable_dims = {2, 3};
  spec.chain.push_back(Block{BlockKind::Ccp, CopeParams(Variant::Ccp, 2, {2, 3}, 3, 4, 0, true), {false, {0, 1}}});
  spec.chain.push_back(Block{BlockKind::Ncp, CopeParams(Variant::Ncp, 2, {4, 3}, 3, 4, 5), {true, {1}}});
  spec.chain.push_back(Block{BlockKind::Spade, CopeParams(Variant::Ncp, 3, {4, 2}, 2, 3), {true, {0}}});
  spec.chain.push_back(Block{BlockKind::Additive, CopeParams(Variant::Ncp, 2, {3}, 2, 3), {true, {}}});
  spec.chain.push_back(Block{BlockKind::PiNet, PiNetParams(2, 6, 3, 2), {true, {1}}});
  spec.chain.push_back(Block{BlockKind::ConcatLinear, ConcatParams(2, 2), {true, {}}});
  spec.output_activation = Activation::Tanh;
  spec.centering = Centering::BatchMean;
  initialize(spec, rng, {.scale = 1.0, .ones_for_scaling = false, .random_bias = true});
  std::get<ConcatParams>(spec.chain.back().params).P = testing::random_matrix(2, 2, rng);
  return spec;
}

std::vector<Matrix> flat(const ModelSpec& spec) {
  std::vector<Matrix> out;
  spec.for_each_parameter([&](const std::string&, const Matrix& m) { out.push_back(m); });
  return out;
}

TEST(Checkpoint, JsonRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  ModelSpec spec = every_kind_model(rng);
  auto& first = std::get<CopeParams>(spec.chain[0].params);
  first.C()(0, 0) = 0.1 + 0.2;
  first.C()(0, 1) = std::numeric_limits<double>::denorm_min();
  first.C()(0, 2) = -1.0 / 3.0;
  first.beta()(0, 0) = 1e300;

  const ModelSpec back = model_from_json(nlohmann::json::parse(model_to_json(spec).dump()));
  EXPECT_EQ(flat(back), flat(spec));
  EXPECT_EQ(back.variable_dims, spec.variable_dims);
  EXPECT_EQ(back.output_activation, Activation::Tanh);
  EXPECT_EQ(back.centering, Centering::BatchMean);
  ASSERT_EQ(back.chain.size(), spec.chain.size());
  for (std::size_t i = 0; i < spec.chain.size(); ++i) {
    EXPECT_EQ(back.chain[i].kind, spec.chain[i].kind);
    EXPECT_EQ(back.chain[i].inputs.previous, spec.chain[i].inputs.previous);
    EXPECT_EQ(back.chain[i].inputs.variables, spec.chain[i].inputs.variables);
  }
  EXPECT_TRUE(std::get<CopeParams>(back.chain[0].params).share_conditional());
  EXPECT_EQ(std::get<CopeParams>(back.chain[1].params).omega(), 5u);
}

TEST(Checkpoint, FileRoundTripPreservesOutputs) {
  std::mt19937_64 rng(2);
  const ModelSpec spec = every_kind_model(rng);
  const auto path = std::filesystem::temp_directory_path() / "cope_checkpoint_test.json";
  save_checkpoint(spec, path);
  const ModelSpec back = load_checkpoint(path);
  const std::vector<Matrix> vars{sample_uniform(8, 2, -1, 1, rng), sample_uniform(8, 3, -1, 1, rng)};
  EXPECT_EQ(product_compose(back, vars), product_compose(spec, vars));
  std::filesystem::remove(path);
}

TEST(Checkpoint, NumbersUseAtMostSeventeenSignificantDigits) {
  std::mt19937_64 rng(3);
  const std::string text = model_to_json(every_kind_model(rng)).dump();
  const std::regex number(R"([-+]?[0-9]*\.?[0-9]+([eE][-+]?[0-9]+)?)");
  std::size_t longest = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
    std::string mantissa = it->str();
    mantissa = mantissa.substr(0, mantissa.find_first_of("eE"));
    std::string digits;
    for (char c : mantissa)
      if (std::isdigit(static_cast<unsigned char>(c)) && !(digits.empty() && c == '0')) digits += c;
    longest = std::max(longest, digits.size());
  }
  EXPECT_LE(longest, 17u);
}

class CheckpointSchema : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(4);
    json = model_to_json(every_kind_model(rng));
  }
  void expect_rejected(const std::string& fragment) {
    try {
      model_from_json(json);
      FAIL() << "expected rejection mentioning " << fragment;
    } catch (const std::invalid_argument& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  }
  nlohmann::json json;
};

TEST_F(CheckpointSchema, WrongFormat) {
  json["format"] = "something-else";
  expect_rejected("format");
}

TEST_F(CheckpointSchema, WrongVersion) {
  json["version"] = 99;
  expect_rejected("version");
}

TEST_F(CheckpointSchema, MissingParameter) {
  json["blocks"][0]["parameters"].erase(0);
  expect_rejected("missing parameter");
}

TEST_F(CheckpointSchema, ExtraParameter) {
  json["blocks"][0]["parameters"].push_back({{"name", "Z"}, {"shape", {1, 1}}, {"data", {0.0}}});
  expect_rejected("extra");
}

TEST_F(CheckpointSchema, WrongShape) {
  json["blocks"][0]["parameters"][0]["shape"] = {7, 7};
  expect_rejected("shape");
}

TEST_F(CheckpointSchema, NonNumericData) {
  json["blocks"][0]["parameters"][0]["data"][0] = "x";
  expect_rejected("data");
}

TEST_F(CheckpointSchema, UnknownActivation) {
  json["output_activation"] = "relu";
  expect_rejected("output_activation");
}

TEST_F(CheckpointSchema, BrokenChain) {
  json["blocks"][1]["inputs"]["previous"] = false;
  EXPECT_THROW(model_from_json(json), std::invalid_argument);
}

TEST(Checkpoint, UnreadableFile) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/model.json"), std::runtime_error);
  const auto path = std::filesystem::temp_directory_path() / "cope_checkpoint_garbage.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_checkpoint(path), std::invalid_argument);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cope
