#include "freestein/model_io.hpp"

#include <fstream>

namespace freestein {

using nlohmann::json;

double number_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return QComplex::parse_rational(j.get<std::string>()).get_d();
    } catch (const std::exception& e) {
      throw SpecError(field + ": " + e.what());
    }
  }
  throw SpecError(field + ": expected a number or rational string");
}

namespace {

const json& require(const json& spec, const std::string& key, const std::string& where) {
  if (!spec.is_object() || !spec.contains(key)) throw SpecError(where + "." + key + ": missing field");
  return spec.at(key);
}

cplx entry_from_json(const json& j, const std::string& field) {
  if (j.is_array()) {
    if (j.size() != 2) throw SpecError(field + ": complex entries must be [re, im]");
    return {number_from_json(j[0], field), number_from_json(j[1], field)};
  }
  return number_from_json(j, field);
}

Eigen::MatrixXcd matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw SpecError(field + ": expected a non-empty nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw SpecError(field + ": expected rows as arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw SpecError(field + ": ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = entry_from_json(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

std::vector<std::vector<Eigen::MatrixXcd>> block_family(const json& j, std::size_t blocks,
                                                        const std::string& field) {
  if (!j.is_array()) throw SpecError(field + ": expected an array");
  std::vector<std::vector<Eigen::MatrixXcd>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const json& item = j[i];
    // With a single block, a matrix of plain (real) entries may be given bare.
    std::vector<Eigen::MatrixXcd> per_block;
    const bool bare = blocks == 1 && item.is_array() && !item.empty() && item[0].is_array() &&
                      !item[0].empty() && !item[0][0].is_array();
    if (bare) {
      per_block.push_back(matrix_from_json(item, f));
    } else {
      if (!item.is_array() || item.size() != blocks) {
        throw SpecError(f + ": expected one matrix per block (" + std::to_string(blocks) + ")");
      }
      for (std::size_t b = 0; b < blocks; ++b) {
        per_block.push_back(matrix_from_json(item[b], f + "[" + std::to_string(b) + "]"));
      }
    }
    out.push_back(std::move(per_block));
  }
  return out;
}

int cap_from(const json& spec) {
  if (spec.contains("cap")) {
    int cap = spec.at("cap").get<int>();
    if (cap < 1) throw SpecError("model.cap: must be positive");
    return cap;
  }
  return default_degree_cap();
}

ModelPtr matrix_from_json(const json& spec) {
  std::vector<MatrixBlock> blocks;
  const json& jb = require(spec, "blocks", "model");
  if (!jb.is_array() || jb.empty()) throw SpecError("model.blocks: expected a non-empty array");
  for (std::size_t b = 0; b < jb.size(); ++b) {
    const std::string f = "model.blocks[" + std::to_string(b) + "]";
    MatrixBlock blk;
    if (jb[b].is_array() && jb[b].size() == 2) {
      blk.k = jb[b][0].get<int>();
      blk.weight = number_from_json(jb[b][1], f + ".weight");
    } else if (jb[b].is_object()) {
      blk.k = require(jb[b], "size", f).get<int>();
      blk.weight = number_from_json(require(jb[b], "weight", f), f + ".weight");
    } else {
      throw SpecError(f + ": expected [size, weight] or {\"size\", \"weight\"}");
    }
    blocks.push_back(blk);
  }
  auto generators = block_family(require(spec, "generators", "model"), blocks.size(), "model.generators");
  std::vector<int> star;
  if (spec.contains("star")) {
    for (const auto& s : spec.at("star")) star.push_back(s.get<int>() - 1);
  }
  std::vector<std::vector<Eigen::MatrixXcd>> b_basis;
  if (spec.contains("b_basis")) b_basis = block_family(spec.at("b_basis"), blocks.size(), "model.b_basis");
  try {
    return std::make_shared<MatrixModel>(blocks, generators, star, b_basis, cap_from(spec));
  } catch (const SpecError&) {
    throw;
  } catch (const std::exception& e) {
    throw SpecError(std::string("model: ") + e.what());
  }
}

Density density_from_json(const json& j) {
  Density d;
  const std::string kind = require(j, "kind", "model.density").get<std::string>();
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? number_from_json(j.at(key), std::string("model.density.") + key) : fallback;
  };
  if (kind == "semicircle") {
    d.kind = Density::Kind::semicircle;
    d.center = num("center", 0.0);
    d.radius = num("radius", 2.0);
  } else if (kind == "uniform") {
    d.kind = Density::Kind::uniform;
    d.a = num("a", 0.0);
    d.b = num("b", 1.0);
  } else if (kind == "table") {
    d.kind = Density::Kind::table;
    for (const auto& v : require(j, "x", "model.density")) d.x.push_back(number_from_json(v, "model.density.x"));
    for (const auto& v : require(j, "density", "model.density")) {
      d.values.push_back(number_from_json(v, "model.density.density"));
    }
  } else {
    throw SpecError("model.density.kind: unknown density '" + kind + "'");
  }
  d.mass = -1.0;  // filled in by the caller when absent
  if (j.contains("mass")) d.mass = number_from_json(j.at("mass"), "model.density.mass");
  return d;
}

}  // namespace

std::shared_ptr<const MeasureModel> measure_from_json(const json& spec) {
  std::vector<Atom> atoms;
  double atom_mass = 0.0;
  if (spec.contains("atoms")) {
    for (std::size_t i = 0; i < spec.at("atoms").size(); ++i) {
      const json& a = spec.at("atoms")[i];
      const std::string f = "model.atoms[" + std::to_string(i) + "]";
      if (!a.is_array() || a.size() != 2) throw SpecError(f + ": expected [location, mass]");
      Atom atom{number_from_json(a[0], f + ".location"), number_from_json(a[1], f + ".mass")};
      atom_mass += atom.mass;
      atoms.push_back(atom);
    }
  }
  Density density;
  if (spec.contains("density") && !spec.at("density").is_null()) {
    density = density_from_json(spec.at("density"));
    if (density.mass < 0.0) density.mass = 1.0 - atom_mass;
  }
  try {
    return std::make_shared<MeasureModel>(atoms, density, cap_from(spec));
  } catch (const SpecError&) {
    throw;
  } catch (const std::exception& e) {
    throw SpecError(std::string("model: ") + e.what());
  }
}

ModelPtr model_from_json(const json& spec, const std::filesystem::path& base_dir) {
  if (!spec.is_object()) throw SpecError("model: expected a JSON object");
  const std::string type = require(spec, "type", "model").get<std::string>();
  if (type == "matrix") return matrix_from_json(spec);
  if (type == "semicircular") {
    const int n = spec.contains("n") ? spec.at("n").get<int>() : 1;
    if (n < 1) throw SpecError("model.n: must be positive");
    return std::make_shared<SemicircularModel>(n, cap_from(spec));
  }
  if (type == "measure") return measure_from_json(spec);
  if (type == "free_product") {
    std::vector<ModelPtr> factors;
    const json& jf = require(spec, "factors", "model");
    if (!jf.is_array() || jf.empty()) throw SpecError("model.factors: expected a non-empty array");
    for (const auto& f : jf) {
      if (f.is_string()) {
        factors.push_back(load_model(base_dir / f.get<std::string>()));
      } else {
        factors.push_back(model_from_json(f, base_dir));
      }
    }
    try {
      return std::make_shared<FreeProductModel>(factors, cap_from(spec));
    } catch (const std::exception& e) {
      throw SpecError(std::string("model.factors: ") + e.what());
    }
  }
  throw SpecError("model.type: unknown model type '" + type + "'");
}

ModelPtr load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("model: cannot read '" + path.string() + "'");
  json spec;
  try {
    in >> spec;
  } catch (const json::parse_error& e) {
    throw SpecError("model: invalid JSON in '" + path.string() + "': " + e.what());
  }
  return model_from_json(spec, path.parent_path());
}

}  // namespace freestein
