#pragma once

// JSON and CSV forms of computation results. Every JSON document carries
// "schema": "free-stein/1"; numeric polynomials are written with [re, im]
// floating-point coefficients. Non-finite numbers become null together with
// an explicit flag.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freestein/closedform.hpp"
#include "freestein/stein.hpp"

namespace freestein {

inline constexpr const char* kSchema = "free-stein/1";

nlohmann::json to_json(const NumPoly& p);
nlohmann::json to_json(const NumPolyTuple& p);
nlohmann::json to_json(const DegreeScheme& s);
nlohmann::json to_json(const DiscrepancyReport& r);
nlohmann::json to_json(const SigmaReport& r);
nlohmann::json to_json(const ResidualReport& r, const GeneratorSystem& sys);
nlohmann::json to_json(const AlphaReport& r);
nlohmann::json to_json(const OneVarResult& r);
nlohmann::json to_json(const RadulescuResult& r);
nlohmann::json to_json(const GraphResult& r);
nlohmann::json to_json(const EpsKernelResult& r);
nlohmann::json to_json(const LogEnergyResult& r);

/// Exact rational as {"value": double, "exact": "p/q"}.
nlohmann::json rational_json(const mpq_class& q);

/// {"schema": ..., "command": ..., <payload fields>}.
nlohmann::json document(const std::string& command, const nlohmann::json& payload);

/// Serialises with 2-space indentation and a trailing newline.
std::string dump(const nlohmann::json& j);

struct CsvRow {
  double parameter = 0.0;
  double value = 0.0;
  std::string diagnostics;
};

/// Header "parameter,value,diagnostics"; values use 17 significant digits.
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

}  // namespace freestein
