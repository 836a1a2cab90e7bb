#pragma once

// JSON model checkpoints.
//
// {
//   "format": "cope-model", "version": 1,
//   "variable_dims": [2, 4],
//   "output_activation": "none" | "tanh",
//   "centering": "none" | "batch_mean",
//   "blocks": [
//     { "kind": "ccp" | "ncp" | "spade" | "additive" | "pinet" | "concat_linear",
//       "inputs": { "previous": false, "variables": [0, 1] },
//       // ccp/ncp/spade/additive:
//       "order": 2, "input_dims": [2, 4], "rank": 8, "out_dim": 16, "omega": 8,
//       "share_conditional": false,
//       // pinet: "order", "in_dim", "rank", "out_dim"; concat_linear: "in_dim", "out_dim"
//       "parameters": [ { "name": "U[1,I]", "shape": [2, 8], "data": [...] }, ... ] } ] }
//
// "data" is row-major. Numbers are written in shortest round-trip form (at
// most 17 significant digits), so save/load reproduces every double exactly.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "cope/models.hpp"

namespace cope {

nlohmann::json model_to_json(const ModelSpec& spec);
/// Throws std::invalid_argument on schema violations (missing or unknown
/// parameters, wrong shapes, non-numeric data).
ModelSpec model_from_json(const nlohmann::json& j);

void save_checkpoint(const ModelSpec& spec, const std::filesystem::path& path);
ModelSpec load_checkpoint(const std::filesystem::path& path);

}  // namespace cope
