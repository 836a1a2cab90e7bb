#include "cope/checkpoint.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

namespace cope {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "cope-model";
constexpr int kVersion = 1;

json matrix_json(const std::string& name, const Matrix& m) {
  return {{"name", name}, {"shape", {m.rows(), m.cols()}}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw std::invalid_argument(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

// Fills every parameter visited by `visit` from the named entries.
template <class Visit>
void read_parameters(const json& block, const std::string& where, Visit&& visit) {
  const json entries = field<json>(block, "parameters", where);
  if (!entries.is_array()) throw std::invalid_argument(where + ": field 'parameters' must be an array");
  std::map<std::string, const json*> by_name;
  for (const auto& entry : entries) {
    const auto name = field<std::string>(entry, "name", where);
    if (!by_name.emplace(name, &entry).second) throw std::invalid_argument(where + ": duplicate parameter " + name);
  }
  std::size_t used = 0;
  visit([&](const std::string& name, Matrix& m) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::invalid_argument(where + ": missing parameter " + name);
    const auto shape = field<std::vector<std::size_t>>(*it->second, "shape", where + " " + name);
    if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
      throw std::invalid_argument(where + ": parameter " + name + " should have shape " + m.shape_string());
    }
    auto data = field<std::vector<double>>(*it->second, "data", where + " " + name);
    m = Matrix(shape[0], shape[1], std::move(data));
    ++used;
  });
  if (used != by_name.size()) throw std::invalid_argument(where + ": unexpected extra parameters");
}

std::string activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "none"; }
std::string centering_name(Centering c) { return c == Centering::BatchMean ? "batch_mean" : "none"; }

}  // namespace

json model_to_json(const ModelSpec& spec) {
  json blocks = json::array();
  for (const Block& block : spec.chain) {
    json b;
    b["kind"] = to_string(block.kind);
    b["inputs"] = {{"previous", block.inputs.previous}, {"variables", block.inputs.variables}};
    json params = json::array();
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, CopeParams>) {
            b["order"] = p.order();
            b["input_dims"] = p.input_dims();
            b["rank"] = p.rank();
            b["out_dim"] = p.out_dim();
            b["omega"] = p.omega();
            b["share_conditional"] = p.share_conditional();
            p.for_each_parameter([&](const std::string& name, const Matrix& m) { params.push_back(matrix_json(name, m)); });
          } else if constexpr (std::is_same_v<T, PiNetParams>) {
            b["order"] = p.order();
            b["in_dim"] = p.in_dim();
            b["rank"] = p.rank();
            b["out_dim"] = p.out_dim();
            for (std::size_t n = 0; n < p.lambda.size(); ++n)
              params.push_back(matrix_json("Lambda[" + std::to_string(n + 1) + "]", p.lambda[n]));
            params.push_back(matrix_json("Gamma", p.gamma));
            params.push_back(matrix_json("beta", p.beta));
          } else {
            b["in_dim"] = p.P.rows();
            b["out_dim"] = p.P.cols();
            params.push_back(matrix_json("P", p.P));
          }
        },
        block.params);
    b["parameters"] = std::move(params);
    blocks.push_back(std::move(b));
  }
  return {{"format", kFormat},
          {"version", kVersion},
          {"variable_dims", spec.variable_dims},
          {"output_activation", activation_name(spec.output_activation)},
          {"centering", centering_name(spec.centering)},
          {"blocks", std::move(blocks)}};
}

ModelSpec model_from_json(const json& j) {
  const std::string root = "checkpoint";
  if (field<std::string>(j, "format", root) != kFormat) throw std::invalid_argument("checkpoint: unknown format");
  if (field<int>(j, "version", root) != kVersion) throw std::invalid_argument("checkpoint: unsupported version");

  ModelSpec spec;
  spec.variable_dims = field<std::vector<std::size_t>>(j, "variable_dims", root);
  const auto act = field<std::string>(j, "output_activation", root);
  if (act != "none" && act != "tanh") throw std::invalid_argument("checkpoint: unknown output_activation " + act);
  spec.output_activation = act == "tanh" ? Activation::Tanh : Activation::None;
  const auto cen = field<std::string>(j, "centering", root);
  if (cen != "none" && cen != "batch_mean") throw std::invalid_argument("checkpoint: unknown centering " + cen);
  spec.centering = cen == "batch_mean" ? Centering::BatchMean : Centering::None;

  const auto blocks = field<json>(j, "blocks", root);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const json& b = blocks[i];
    const std::string where = "checkpoint block " + std::to_string(i);
    const BlockKind kind = block_kind_from_string(field<std::string>(b, "kind", where));
    const json inputs = field<json>(b, "inputs", where);
    BlockInputs in{field<bool>(inputs, "previous", where), field<std::vector<std::size_t>>(inputs, "variables", where)};

    switch (kind) {
      case BlockKind::PiNet: {
        PiNetParams p(field<std::size_t>(b, "order", where), field<std::size_t>(b, "in_dim", where),
                      field<std::size_t>(b, "rank", where), field<std::size_t>(b, "out_dim", where));
        read_parameters(b, where, [&](auto&& f) {
          for (std::size_t n = 0; n < p.lambda.size(); ++n) f("Lambda[" + std::to_string(n + 1) + "]", p.lambda[n]);
          f("Gamma", p.gamma);
          f("beta", p.beta);
        });
        spec.chain.push_back({kind, std::move(p), std::move(in)});
        break;
      }
      case BlockKind::ConcatLinear: {
        ConcatParams p(field<std::size_t>(b, "in_dim", where), field<std::size_t>(b, "out_dim", where));
        read_parameters(b, where, [&](auto&& f) { f("P", p.P); });
        spec.chain.push_back({kind, std::move(p), std::move(in)});
        break;
      }
      default: {
        const Variant variant = kind == BlockKind::Ccp ? Variant::Ccp : Variant::Ncp;
        CopeParams p(variant, field<std::size_t>(b, "order", where), field<std::vector<std::size_t>>(b, "input_dims", where),
                     field<std::size_t>(b, "rank", where), field<std::size_t>(b, "out_dim", where),
                     field<std::size_t>(b, "omega", where), field<bool>(b, "share_conditional", where));
        read_parameters(b, where, [&](auto&& f) { p.for_each_parameter(f); });
        spec.chain.push_back({kind, std::move(p), std::move(in)});
        break;
      }
    }
  }
  spec.validate();
  return spec;
}

void save_checkpoint(const ModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << model_to_json(spec).dump(1) << '\n';
}

ModelSpec load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("checkpoint " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace cope
