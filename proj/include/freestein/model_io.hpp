#pragma once

// JSON model specifications:
//   {"type": "matrix", "blocks": [[k, weight], ...], "generators": [[M_block, ...], ...],
//    "star": [...], "b_basis": [[M_block, ...], ...]}
//   {"type": "semicircular", "n": 2}
//   {"type": "measure", "atoms": [[t, mass], ...],
//    "density": {"kind": "semicircle" | "uniform" | "table", ...}}
//   {"type": "free_product", "factors": [spec or "relative/path.json", ...]}
// Matrices are nested arrays whose entries are numbers, rational strings or
// [re, im] pairs. Weights and masses may be rational strings such as "1/3".
// The optional "star" pairing is 1-based; an optional "cap" sets the degree cap.

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "freestein/trace.hpp"

namespace freestein {

/// Malformed model specification; the message names the offending field.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numeric value from a number or a rational/decimal string.
double number_from_json(const nlohmann::json& j, const std::string& field);

ModelPtr model_from_json(const nlohmann::json& spec,
                         const std::filesystem::path& base_dir = std::filesystem::current_path());
ModelPtr load_model(const std::filesystem::path& path);

/// Parses a measure spec (type "measure") into atoms and density.
std::shared_ptr<const MeasureModel> measure_from_json(const nlohmann::json& spec);

}  // namespace freestein
