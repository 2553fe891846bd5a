// free-stein: command-line front end for free Stein discrepancy, irregularity
// and dimension.
//
// Every subcommand writes a JSON document ("schema": "free-stein/1") or CSV
// rows (parameter, value, diagnostics). Exit status: 0 on success, 2 on
// invalid input, 3 when the computation finished but raised numerical
// diagnostics (the report is still written), 1 on any other failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "freestein/closedform.hpp"
#include "freestein/model_io.hpp"
#include "freestein/poly_io.hpp"
#include "freestein/report.hpp"
#include "freestein/stein.hpp"

using namespace freestein;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kInvalid = 2, kDiagnostics = 3 };

struct Config {
  std::string model;
  std::string xi;
  std::string xi_file;
  int d_xi = 1;
  int d_proj = 0;  // 0 → d_xi + 2
  int degree = 2;
  int max_degree = 4;
  std::vector<double> radii;
  std::string input;
  std::string output;
  std::string csv;
  std::string format = "json";
  int threads = 1;
  std::uint64_t seed = 0;
  double cutoff = 1e-10;
  double condition_limit = 1e9;
  double tol = 1e-10;
  double zero_tol = 1e-8;
};

struct Outcome {
  json payload;
  std::vector<CsvRow> rows;
};

SolverOptions solver(const Config& c) {
  SolverOptions o;
  o.cutoff = c.cutoff;
  o.threads = c.threads;
  o.condition_limit = c.condition_limit;
  return o;
}

DegreeScheme scheme(const Config& c) {
  return c.d_proj > 0 ? DegreeScheme{c.d_xi, c.d_proj} : DegreeScheme::with_default_proj(c.d_xi);
}

ModelPtr require_model(const Config& c) {
  if (c.model.empty()) throw std::invalid_argument("--model is required");
  return load_model(c.model);
}

std::shared_ptr<const MeasureModel> require_measure(const Config& c) {
  auto m = std::dynamic_pointer_cast<const MeasureModel>(require_model(c));
  if (!m) throw SpecError("model: expected a one-variable measure (\"type\": \"measure\")");
  return m;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
}

// Ξ from inline text, a text file, or a JSON polynomial tuple file.
PolyTuple xi_of(const Config& c, const SystemPtr& sys) {
  if (!c.xi.empty() && !c.xi_file.empty()) throw std::invalid_argument("give either --xi or --xi-file");
  if (!c.xi.empty()) return parse_poly(c.xi, sys);
  if (c.xi_file.empty()) throw std::invalid_argument("--xi or --xi-file is required");
  const std::string text = slurp(c.xi_file);
  const json j = json::parse(text, nullptr, false);
  if (!j.is_discarded()) return poly_tuple_from_json(sys, j);
  return parse_poly(text, sys);
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw std::invalid_argument("--radii: at least one radius is required");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.0) || !std::isfinite(radii[i])) throw std::invalid_argument("--radii: radii must be nonnegative");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("--radii: radii must be increasing");
  }
}

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

bool has_diagnostics(const json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "diagnostics" && it.value().is_array() && !it.value().empty()) return true;
      if (has_diagnostics(it.value())) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (has_diagnostics(v)) return true;
    }
  }
  return false;
}

// --- stein subcommands -------------------------------------------------------

Outcome run_discrepancy(const Config& c) {
  auto m = require_model(c);
  const DegreeScheme s = scheme(c);
  s.validate(*m->system());
  auto rep = discrepancy(*m, xi_of(c, m->system()), s, solver(c));
  return {to_json(rep), {{static_cast<double>(s.d_proj), rep.value, joined(rep.diagnostics)}}};
}

Outcome run_irregularity(const Config& c) {
  auto m = require_model(c);
  const DegreeScheme s = scheme(c);
  s.validate(*m->system());
  auto rep = irregularity_estimate(*m, s, solver(c));
  Outcome out{to_json(rep), {}};
  for (const auto& [d, v] : rep.trail) out.rows.push_back({static_cast<double>(d), v, ""});
  if (!out.rows.empty()) out.rows.back().diagnostics = joined(rep.diagnostics);
  return out;
}

std::vector<DiscrepancyReport> radius_sweep(const TraceModel& m, const Config& c) {
  check_radii(c.radii);
  const DegreeScheme s = scheme(c);
  s.validate(*m.system());
  std::vector<DiscrepancyReport> reps;
  for (double r : c.radii) reps.push_back(irregularity_bounded(m, s, r, solver(c)));
  return reps;
}

Outcome run_bounded(const Config& c) {
  auto m = require_model(c);
  Outcome out;
  json runs = json::array();
  for (const auto& rep : radius_sweep(*m, c)) {
    runs.push_back(to_json(rep));
    out.rows.push_back({*rep.radius, rep.value, joined(rep.diagnostics)});
  }
  out.payload = {{"scheme", to_json(scheme(c))}, {"runs", runs}};
  return out;
}

Outcome run_sweep_radius(const Config& c) {
  auto m = require_model(c);
  Outcome out;
  json values = json::array();
  std::vector<std::pair<double, double>> sweep;
  std::vector<std::string> diags;
  for (const auto& rep : radius_sweep(*m, c)) {
    values.push_back({{"radius", *rep.radius}, {"value", rep.value}, {"interior", rep.interior}});
    sweep.emplace_back(*rep.radius, rep.value);
    out.rows.push_back({*rep.radius, rep.value, joined(rep.diagnostics)});
    for (const auto& d : rep.diagnostics) diags.push_back("R=" + std::to_string(*rep.radius) + ": " + d);
  }
  out.payload = {{"scheme", to_json(scheme(c))}, {"values", values}, {"diagnostics", diags}};
  return out;
}

Outcome run_sweep_degree(const Config& c) {
  auto m = require_model(c);
  if (c.max_degree < 1) throw std::invalid_argument("--max-degree must be positive");
  const int offset = c.d_proj > 0 ? c.d_proj - c.d_xi : 2;
  if (offset < 0) throw std::invalid_argument("--dproj must not be below --dxi");
  Outcome out;
  json steps = json::array();
  const bool with_xi = !c.xi.empty() || !c.xi_file.empty();
  std::vector<std::string> diags;
  double prev = 0.0;
  for (int d = 1; d <= c.max_degree; ++d) {
    double value = 0.0;
    std::vector<std::string> step_diags;
    if (with_xi) {
      // Fixed Ξ, growing test space: the truncated discrepancy is nondecreasing in d_proj.
      const DegreeScheme s{1, d};
      s.validate(*m->system());
      auto rep = discrepancy(*m, xi_of(c, m->system()), s, solver(c));
      value = rep.value;
      step_diags = rep.diagnostics;
      steps.push_back({{"d_proj", d}, {"value", value}, {"gram_condition", rep.gram_condition}});
    } else {
      const DegreeScheme s{d, d + offset};
      s.validate(*m->system());
      auto rep = irregularity_estimate(*m, s, solver(c));
      value = rep.sigma;
      step_diags = rep.diagnostics;
      steps.push_back({{"scheme", to_json(s)}, {"sigma", value}, {"gram_condition", rep.gram_condition}});
    }
    if (d > 1 && !with_xi && value > prev + 1e-8) {
      step_diags.push_back("estimate increased from degree " + std::to_string(d - 1) + " to " + std::to_string(d));
    }
    prev = value;
    out.rows.push_back({static_cast<double>(d), value, joined(step_diags)});
    for (const auto& s : step_diags) diags.push_back("d=" + std::to_string(d) + ": " + s);
  }
  out.payload = {{"quantity", with_xi ? "discrepancy" : "sigma"}, {"steps", steps}, {"diagnostics", diags}};
  return out;
}

Outcome run_sigma_exact(const Config& c) {
  auto m = require_model(c);
  auto rep = sigma_exact_fd(*m, c.degree, solver(c));
  return {to_json(rep), {{static_cast<double>(c.degree), rep.sigma, joined(rep.diagnostics)}}};
}

std::vector<std::pair<double, double>> read_sweep_csv(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<std::pair<double, double>> out;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("parameter", 0) == 0) continue;
    std::istringstream fields(line);
    std::string a, b;
    std::getline(fields, a, ',');
    std::getline(fields, b, ',');
    try {
      out.emplace_back(std::stod(a), std::stod(b));
    } catch (const std::exception&) {
      throw SpecError(path + ":" + std::to_string(lineno) + ": expected 'parameter,value'");
    }
  }
  return out;
}

Outcome run_alpha(const Config& c) {
  std::vector<std::pair<double, double>> sweep;
  Outcome out;
  if (!c.input.empty()) {
    sweep = read_sweep_csv(c.input);
  } else {
    auto m = require_model(c);
    for (const auto& rep : radius_sweep(*m, c)) sweep.emplace_back(*rep.radius, rep.value);
  }
  for (const auto& [r, v] : sweep) out.rows.push_back({r, v, ""});
  auto rep = alpha_estimate(sweep, c.zero_tol);
  json values = json::array();
  for (const auto& [r, v] : sweep) values.push_back({r, v});
  out.payload = to_json(rep);
  out.payload["sweep"] = values;
  return out;
}

// --- closed forms -------------------------------------------------------------

struct ClosedFormConfig {
  std::vector<long> multiplicities;
  std::string blocks;
  double beta0 = 0.0;
  double beta1 = 0.0;
  long order = 0;
  std::string spec;
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  int grid = 33;
  int level = 6;
};

mpq_class rational_arg(const std::string& text, const std::string& field) {
  return rational_from_json(json(text), field);
}

Outcome closed_one_var(const Config& c, const ClosedFormConfig& f) {
  if (!f.multiplicities.empty()) {
    const mpq_class s2 = one_var_star2_multiplicities(f.multiplicities);
    const mpq_class sigma = 1 - s2;
    return {{{"sigma", rational_json(sigma)}, {"irregularity_squared", rational_json(s2)}},
            {{0.0, sigma.get_d(), ""}}};
  }
  auto r = one_var_sigma(*require_measure(c));
  return {to_json(r), {{0.0, r.sigma, ""}}};
}

// "k:weight,k:weight,..." with rational weights, e.g. "2:2/3,1:1/3".
std::vector<FdBlock> parse_blocks(const std::string& text) {
  std::vector<FdBlock> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw SpecError("blocks: expected k:weight, got '" + item + "'");
    FdBlock b;
    try {
      b.k = std::stoi(item.substr(0, colon));
    } catch (const std::exception&) {
      throw SpecError("blocks: bad block size in '" + item + "'");
    }
    b.weight = rational_arg(item.substr(colon + 1), "blocks.weight");
    out.push_back(b);
  }
  return out;
}

Outcome closed_fd(const Config& c, const ClosedFormConfig& f) {
  if (!f.blocks.empty()) {
    const mpq_class s = fd_sigma(parse_blocks(f.blocks));
    return {{{"sigma", rational_json(s)}}, {{0.0, s.get_d(), ""}}};
  }
  auto m = std::dynamic_pointer_cast<const MatrixModel>(require_model(c));
  if (!m) throw SpecError("model: expected a matrix model (\"type\": \"matrix\")");
  const double s = fd_sigma(m->blocks());
  json blocks = json::array();
  for (const auto& b : m->blocks()) blocks.push_back({{"k", b.k}, {"weight", b.weight}});
  return {{{"sigma", s}, {"blocks", blocks}}, {{0.0, s, ""}}};
}

Outcome closed_group(const Config&, const ClosedFormConfig& f) {
  const double s = group_sigma(f.beta0, f.beta1);
  return {{{"sigma", s}, {"beta0", f.beta0}, {"beta1", f.beta1}}, {{0.0, s, ""}}};
}

Outcome closed_finite_group(const Config&, const ClosedFormConfig& f) {
  const mpq_class s = finite_group_sigma(f.order);
  return {{{"sigma", rational_json(s)}, {"order", f.order}}, {{static_cast<double>(f.order), s.get_d(), ""}}};
}

Outcome closed_radulescu(const Config&, const ClosedFormConfig& f) {
  if (f.spec.empty()) throw std::invalid_argument("--spec is required");
  auto r = radulescu(radulescu_from_json(read_json(f.spec)));
  return {to_json(r), {{0.0, r.sigma.get_d(), ""}}};
}

Outcome closed_graph(const Config&, const ClosedFormConfig& f) {
  if (f.spec.empty()) throw std::invalid_argument("--spec is required");
  auto r = graph_sigma(graph_from_json(read_json(f.spec)));
  return {to_json(r), {{0.0, r.sigma_xb.get_d(), joined(r.diagnostics)}}};
}

Outcome closed_eps_kernel(const Config& c, const ClosedFormConfig& f) {
  auto m = require_measure(c);
  if (f.eps.empty()) throw std::invalid_argument("--eps: at least one value is required");
  Outcome out;
  json runs = json::array();
  for (double e : f.eps) {
    auto r = eps_kernel(*m, e, f.grid, c.tol);
    runs.push_back(to_json(r));
    out.rows.push_back({e, r.bound, joined(r.diagnostics)});
  }
  out.payload = {{"runs", runs}};
  return out;
}

Outcome closed_log_energy(const Config& c, const ClosedFormConfig&) {
  auto r = log_energy(*require_measure(c), c.tol);
  return {to_json(r), {{0.0, r.value, joined(r.diagnostics)}}};
}

Outcome closed_staircase(const Config&, const ClosedFormConfig& f) {
  auto r = staircase_log_energy(f.level);
  Outcome out{to_json(r), {}};
  for (const auto& [n, v] : r.partial_sums) out.rows.push_back({static_cast<double>(n), v, ""});
  return out;
}

// --- output -------------------------------------------------------------------

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int emit(const std::string& command, const Config& c, const Outcome& o) {
  const json doc = document(command, o.payload);
  std::ostringstream csv;
  write_csv(csv, o.rows);
  write_text(c.output, c.format == "csv" ? csv.str() : dump(doc));
  if (!c.csv.empty()) write_text(c.csv, csv.str());
  if (has_diagnostics(o.payload)) {
    std::cerr << "free-stein: numerical diagnostics raised; see the report\n";
    return kDiagnostics;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free Stein discrepancy, irregularity and dimension", "free-stein"};
  app.require_subcommand(1);
  Config cfg;
  ClosedFormConfig cf;

  app.add_option("--threads", cfg.threads, "Gram assembly workers")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed for randomized checks");
  app.add_option("-o,--output", cfg.output, "Report path (default: stdout)");
  app.add_option("--csv", cfg.csv, "Additionally write CSV rows to this path");
  app.add_option("--format", cfg.format, "Primary output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--cutoff", cfg.cutoff, "Relative eigenvalue cutoff")->check(CLI::PositiveNumber);
  app.add_option("--condition-limit", cfg.condition_limit, "Gram condition number flagged beyond this")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", cfg.tol, "Quadrature tolerance")->check(CLI::PositiveNumber);

  std::string command;
  std::function<Outcome()> action;

  auto add_model = [&](CLI::App* sub) { sub->add_option("--model", cfg.model, "Model spec (JSON)"); };
  auto add_scheme = [&](CLI::App* sub) {
    sub->add_option("--dxi", cfg.d_xi, "Degree of candidate conjugate tuples");
    sub->add_option("--dproj", cfg.d_proj, "Degree of test tuples (default dxi + 2)");
  };
  auto add_xi = [&](CLI::App* sub) {
    sub->add_option("--xi", cfg.xi, "Tuple such as \"(t1, t2)\"");
    sub->add_option("--xi-file", cfg.xi_file, "Tuple as text or JSON");
  };
  auto add_radii = [&](CLI::App* sub) {
    sub->add_option("--radii", cfg.radii, "Comma-separated nonnegative increasing radii")->delimiter(',');
  };
  auto bind = [&](CLI::App* sub, const std::string& name, std::function<Outcome()> fn) {
    sub->callback([&command, &action, name, fn] {
      command = name;
      action = fn;
    });
  };

  auto* disc = app.add_subcommand("discrepancy", "Truncated discrepancy of a given tuple");
  add_model(disc);
  add_scheme(disc);
  add_xi(disc);
  bind(disc, "discrepancy", [&] { return run_discrepancy(cfg); });

  auto* irr = app.add_subcommand("irregularity", "Irregularity and dimension estimate");
  add_model(irr);
  add_scheme(irr);
  bind(irr, "irregularity", [&] { return run_irregularity(cfg); });

  auto* bounded = app.add_subcommand("bounded", "Bounded irregularity for each radius");
  add_model(bounded);
  add_scheme(bounded);
  add_radii(bounded);
  bind(bounded, "bounded", [&] { return run_bounded(cfg); });

  auto* exact = app.add_subcommand("sigma-exact", "Exact dimension of a finite-dimensional model");
  add_model(exact);
  exact->add_option("--d,--degree", cfg.degree, "Relation degree")->check(CLI::PositiveNumber);
  bind(exact, "sigma-exact", [&] { return run_sigma_exact(cfg); });

  auto* sdeg = app.add_subcommand("sweep-degree", "Estimates over increasing truncation degree");
  add_model(sdeg);
  add_scheme(sdeg);
  add_xi(sdeg);
  sdeg->add_option("--max-degree", cfg.max_degree, "Largest degree of the sweep");
  bind(sdeg, "sweep-degree", [&] { return run_sweep_degree(cfg); });

  auto* srad = app.add_subcommand("sweep-radius", "Bounded irregularity against the radius");
  add_model(srad);
  add_scheme(srad);
  add_radii(srad);
  bind(srad, "sweep-radius", [&] { return run_sweep_radius(cfg); });

  auto* alpha = app.add_subcommand("alpha", "Decay exponent of the bounded irregularity");
  add_model(alpha);
  add_scheme(alpha);
  add_radii(alpha);
  alpha->add_option("--input", cfg.input, "Existing sweep CSV (parameter,value)");
  alpha->add_option("--zero-tol", cfg.zero_tol, "Values at or below this count as zero");
  bind(alpha, "alpha", [&] { return run_alpha(cfg); });

  auto* closed = app.add_subcommand("closed-form", "Closed-form values");
  closed->require_subcommand(1);
  auto closed_sub = [&](const std::string& name, const std::string& help,
                        Outcome (*fn)(const Config&, const ClosedFormConfig&)) {
    auto* sub = closed->add_subcommand(name, help);
    bind(sub, "closed-form " + name, [&cfg, &cf, fn] { return fn(cfg, cf); });
    return sub;
  };
  auto* one = closed_sub("one-var", "One-variable law", closed_one_var);
  add_model(one);
  one->add_option("--multiplicities", cf.multiplicities, "Eigenvalue multiplicities")->delimiter(',');
  auto* fd = closed_sub("fd", "Finite-dimensional algebra", closed_fd);
  add_model(fd);
  fd->add_option("--blocks", cf.blocks, "Blocks as k:weight,... (rational weights)");
  auto* grp = closed_sub("group", "Group algebra from l2-Betti numbers", closed_group);
  grp->add_option("--beta0", cf.beta0)->required();
  grp->add_option("--beta1", cf.beta1)->required();
  auto* fgrp = closed_sub("finite-group", "Finite group algebra", closed_finite_group);
  fgrp->add_option("--order", cf.order)->required();
  auto* rad = closed_sub("radulescu", "Radulescu projection pairs", closed_radulescu);
  rad->add_option("--spec", cf.spec, "Pairs spec (JSON)");
  auto* graph = closed_sub("graph", "Free graph algebra", closed_graph);
  graph->add_option("--spec", cf.spec, "Graph spec (JSON)");
  auto* eps = closed_sub("eps-kernel", "Regularised kernels of a one-variable law", closed_eps_kernel);
  add_model(eps);
  eps->add_option("--eps", cf.eps, "Comma-separated regularisation widths")->delimiter(',');
  eps->add_option("--grid", cf.grid, "Grid points for g_eps on the continuous part");
  auto* le = closed_sub("log-energy", "Logarithmic energy", closed_log_energy);
  add_model(le);
  auto* stair = closed_sub("staircase", "Partial log energies of the staircase density", closed_staircase);
  stair->add_option("--level", cf.level, "Number of steps")->check(CLI::Range(1, 60));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    return emit(command, cfg, action());
  } catch (const ParseError& e) {
    std::cerr << "free-stein: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::logic_error& e) {  // invalid_argument, SpecError, StructuralError, DegreeCapError
    std::cerr << "free-stein: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "free-stein: " << e.what() << '\n';
    return kFailure;
  }
}
