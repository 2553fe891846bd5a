#include "freestein/report.hpp"

#include <cmath>
#include <cstdio>

#include "freestein/poly_io.hpp"

namespace freestein {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json string_list(const std::vector<std::string>& items) {
  json out = json::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

json trail_json(const std::vector<std::pair<int, double>>& trail) {
  json out = json::array();
  for (const auto& [d, v] : trail) out.push_back({d, number(v)});
  return out;
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json to_json(const NumPoly& p) {
  json terms = json::array();
  for (const auto& [w, c] : p.terms()) {
    terms.push_back({{"word", to_json(*p.system(), w)}, {"coeff", {c.real(), c.imag()}}});
  }
  return {{"n", p.system()->size()}, {"terms", terms}};
}

json to_json(const NumPolyTuple& p) {
  json out = json::array();
  for (const auto& q : p) out.push_back(to_json(q));
  return out;
}

json to_json(const DegreeScheme& s) { return {{"d_xi", s.d_xi}, {"d_proj", s.d_proj}}; }

json to_json(const DiscrepancyReport& r) {
  json j{{"value", number(r.value)},
         {"scheme", to_json(r.scheme)},
         {"gram_condition", number(r.gram_condition)},
         {"gram_rank", r.gram_rank},
         {"kernel_distance", number(r.kernel_distance)},
         {"xi_norm", number(r.xi_norm)},
         {"diagnostics", string_list(r.diagnostics)}};
  if (r.radius) {
    j["radius"] = *r.radius;
    j["interior"] = r.interior;
    j["multiplier"] = number(r.multiplier);
  }
  if (r.xi) j["xi"] = to_json(*r.xi);
  return j;
}

json to_json(const SigmaReport& r) {
  json j{{"sigma", number(r.sigma)},
         {"irregularity", number(r.irregularity)},
         {"irregularity_squared", number(r.irregularity * r.irregularity)},
         {"mode", mode_name(r.mode)},
         {"n", r.n},
         {"scheme", to_json(r.scheme)},
         {"trail", trail_json(r.trail)},
         {"gram_condition", number(r.gram_condition)},
         {"gram_rank", r.gram_rank},
         {"diagnostics", string_list(r.diagnostics)}};
  if (r.mode == SigmaReport::Mode::exact_fd) j["scheme"] = {{"d", r.scheme.d_proj}};
  if (r.xi) j["xi"] = to_json(*r.xi);
  return j;
}

json to_json(const ResidualReport& r, const GeneratorSystem& sys) {
  return {{"max_residual", number(r.max_residual)},
          {"argmax", {{"slot", r.argmax.slot + 1}, {"word", to_json(sys, r.argmax.word)}}},
          {"fisher_info", number(r.fisher_info)},
          {"tested", r.tested}};
}

json to_json(const AlphaReport& r) {
  return {{"alpha", number(r.alpha)},
          {"minus_infinity", r.minus_infinity},
          {"window", r.window},
          {"floored", r.floored},
          {"diagnostics", string_list(r.diagnostics)}};
}

json rational_json(const mpq_class& q) { return {{"value", q.get_d()}, {"exact", q.get_str()}}; }

json to_json(const OneVarResult& r) { return {{"sigma", r.sigma}, {"irregularity_squared", r.star2}}; }

json to_json(const RadulescuResult& r) {
  return {{"K", r.k_total},
          {"t", rational_json(r.t)},
          {"irregularity_squared", rational_json(r.star2)},
          {"sigma", rational_json(r.sigma)},
          {"identity_holds", r.identity_holds}};
}

json to_json(const GraphResult& r) {
  return {{"directed_edges", r.directed_edges},
          {"t", rational_json(r.t)},
          {"irregularity_squared", rational_json(r.star2)},
          {"sigma_xb", rational_json(r.sigma_xb)},
          {"sigma_y", rational_json(r.sigma_y)},
          {"has_loops", r.has_loops},
          {"identity_holds", r.identity_holds},
          {"diagnostics", string_list(r.diagnostics)}};
}

json to_json(const EpsKernelResult& r) {
  json atoms = json::array(), grid = json::array();
  for (const auto& [t, g] : r.g_atoms) atoms.push_back({t, number(g)});
  for (const auto& [t, g] : r.g_grid) grid.push_back({t, number(g)});
  return {{"eps", r.eps},         {"bound", number(r.bound)}, {"g_norm", number(r.g_norm)},
          {"g_atoms", atoms},     {"g_grid", grid},           {"converged", r.converged},
          {"diagnostics", string_list(r.diagnostics)}};
}

json to_json(const LogEnergyResult& r) {
  json j{{"value", number(r.value)},
         {"minus_infinity", r.minus_infinity},
         {"converged", r.converged},
         {"diagnostics", string_list(r.diagnostics)}};
  if (!r.partial_sums.empty()) j["partial_sums"] = trail_json(r.partial_sums);
  return j;
}

json document(const std::string& command, const json& payload) {
  json doc{{"schema", kSchema}, {"command", command}};
  for (auto it = payload.begin(); it != payload.end(); ++it) doc[it.key()] = it.value();
  return doc;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << "parameter,value,diagnostics\n";
  for (const auto& r : rows) {
    out << csv_number(r.parameter) << ',' << csv_number(r.value) << ',' << csv_field(r.diagnostics) << '\n';
  }
}

}  // namespace freestein
