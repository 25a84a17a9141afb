#pragma once

// JSON model/data specs, job configs, CSV field dumps and JSON reports.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bjorling/bjorling.hpp"
#include "bjorling/ck_solver.hpp"
#include "bjorling/error.hpp"
#include "bjorling/fields.hpp"
#include "bjorling/models.hpp"
#include "bjorling/verify.hpp"

namespace bjorling {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

inline double json_bound(const json& j, double missing) {
  if (j.is_null()) return missing;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("bad chart bound '" + s + "'");
  }
  return j.get<double>();
}

inline std::array<std::string, 3> string_triple(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be an array of 3 expression strings");
  std::array<std::string, 3> out;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_string()) throw ConfigError(what + " entries must be strings");
    out[i] = j[i].get<std::string>();
  }
  return out;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace detail

/// {name, variables?: ["x1", "x2", "x3"], chart?: {x_i: [lo, hi] | "positive"},
///  sample_box?: {x_i: [lo, hi]}, frame: 3x3 strings (row i = coordinate
///  component i) or 9 strings row-major, structure_constants?: [[l, j, k, value], ...]}
/// A null bound is unbounded.
inline ModelSpec model_spec_from_json(const json& j) {
  try {
    detail::reject_unknown_keys(j, {"name", "variables", "chart", "sample_box", "frame", "structure_constants"},
                                "model spec");
    ModelSpec s;
    s.name = j.value("name", std::string("custom"));
    const std::vector<std::string>& names = coordinate_names();
    if (j.contains("variables") && j.at("variables").get<std::vector<std::string>>() != names) {
      throw ConfigError("model variables must be [\"x1\", \"x2\", \"x3\"]");
    }
    auto axis = [&](const std::string& key) {
      for (int i = 0; i < 3; ++i) {
        if (names[i] == key) return i;
      }
      throw ConfigError("unknown chart variable '" + key + "'");
    };
    if (j.contains("chart")) {
      for (auto it = j.at("chart").begin(); it != j.at("chart").end(); ++it) {
        const int i = axis(it.key());
        const json& c = it.value();
        if (c.is_string() && c.get<std::string>() == "positive") {
          s.chart[i].lo = 0.0;
        } else if (c.is_array() && c.size() == 2) {
          s.chart[i].lo = detail::json_bound(c[0], -std::numeric_limits<double>::infinity());
          s.chart[i].hi = detail::json_bound(c[1], std::numeric_limits<double>::infinity());
        } else {
          throw ConfigError("chart entry must be [lo, hi] or \"positive\"");
        }
      }
    }
    if (j.contains("sample_box")) {
      for (auto it = j.at("sample_box").begin(); it != j.at("sample_box").end(); ++it) {
        const json& b = it.value();
        if (!b.is_array() || b.size() != 2) throw ConfigError("sample_box entry must be [lo, hi]");
        s.sample_box[axis(it.key())] = std::array<double, 2>{b[0].get<double>(), b[1].get<double>()};
      }
    }
    const json& f = j.at("frame");
    if (f.is_array() && f.size() == 9) {
      for (int r = 0; r < 3; ++r) {
        s.frame[r] = detail::string_triple(json::array({f[3 * r], f[3 * r + 1], f[3 * r + 2]}), "frame");
      }
    } else if (f.is_array() && f.size() == 3) {
      for (int r = 0; r < 3; ++r) s.frame[r] = detail::string_triple(f[r], "frame row");
    } else {
      throw ConfigError("frame must be 3 rows of 3 expression strings or 9 strings");
    }
    if (j.contains("structure_constants")) {
      for (const json& e : j.at("structure_constants")) {
        if (!e.is_array() || e.size() != 4) throw ConfigError("structure constant entries are [l, j, k, value]");
        s.structure_constants.emplace_back(e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<double>());
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model spec: ") + e.what());
  }
}

/// {name?, beta: [3], V: [3], u_range: [a, b], periodic?}
inline BjorlingSpec data_spec_from_json(const json& j) {
  try {
    detail::reject_unknown_keys(j, {"name", "beta", "V", "u_range", "periodic"}, "data spec");
    BjorlingSpec s;
    s.name = j.value("name", std::string("custom"));
    s.beta = detail::string_triple(j.at("beta"), "beta");
    s.normal = detail::string_triple(j.at("V"), "V");
    const json& r = j.at("u_range");
    if (!r.is_array() || r.size() != 2) throw ConfigError("u_range must be [a, b]");
    s.u_min = r[0].get<double>();
    s.u_max = r[1].get<double>();
    s.periodic = j.value("periodic", false);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid data spec: ") + e.what());
  }
}

struct OutputPaths {
  std::string report = "report.json";
  std::string mesh;  // empty: no mesh
  MeshFormat mesh_format = MeshFormat::Obj;
  std::string field_dump;
  std::string patch_csv;
};

struct JobConfig {
  ModelSpec model;
  BjorlingSpec data;
  double epsilon = 0.1;
  int n_u = 128;
  int n_v = 32;
  SolveConfig solver;
  Thresholds thresholds;
  OutputPaths outputs;
  bool flip_normal = false;
  int validate_samples = 64;
  json canonical;  // normalized config used for the hash
};

namespace detail {

inline ModelSpec resolve_model(const json& j, const std::filesystem::path& base) {
  if (j.is_object()) return model_spec_from_json(j);
  if (!j.is_string()) throw ConfigError("model must be a built-in name, a spec path or an inline spec");
  const std::string s = j.get<std::string>();
  for (const std::string& n : builtin_model_names()) {
    if (n == s) return builtin_model_spec(s);
  }
  const std::filesystem::path p = base / s;
  if (!std::filesystem::exists(p)) throw ConfigError("model '" + s + "' is neither built in nor an existing file");
  return model_spec_from_json(read_json_file(p));
}

inline BjorlingSpec resolve_data(const json& j, const std::filesystem::path& base) {
  if (j.is_object()) return data_spec_from_json(j);
  if (!j.is_string()) throw ConfigError("data must be a built-in name, a spec path or an inline spec");
  const std::string s = j.get<std::string>();
  for (const std::string& n : builtin_data_names()) {
    if (n == s) return builtin_data_spec(s);
  }
  const std::filesystem::path p = base / s;
  if (!std::filesystem::exists(p)) throw ConfigError("data '" + s + "' is neither built in nor an existing file");
  return data_spec_from_json(read_json_file(p));
}

inline json model_spec_to_json(const ModelSpec& s) {
  json chart = json::object();
  for (int i = 0; i < 3; ++i) {
    const ChartInterval& c = s.chart[i];
    json lo = std::isinf(c.lo) ? json(nullptr) : json(c.lo);
    json hi = std::isinf(c.hi) ? json(nullptr) : json(c.hi);
    chart[coordinate_names()[i]] = {lo, hi};
  }
  json sc = json::array();
  for (const auto& [l, a, b, v] : s.structure_constants) sc.push_back({l, a, b, v});
  return {{"name", s.name}, {"chart", chart}, {"frame", s.frame}, {"structure_constants", sc}};
}

inline json data_spec_to_json(const BjorlingSpec& s) {
  return {{"name", s.name},
          {"beta", s.beta},
          {"V", s.normal},
          {"u_range", {s.u_min, s.u_max}},
          {"periodic", s.periodic}};
}

}  // namespace detail

inline JobConfig job_config_from_json(const json& j, const std::filesystem::path& base = ".") {
  try {
    detail::reject_unknown_keys(j,
                                {"model", "data", "epsilon", "n_u", "n_v", "scheme", "filter", "noise_floor",
                                 "max_growth_factor", "trust_margin", "formulation", "thresholds", "outputs",
                                 "flip_normal", "validate_samples"},
                                "job config");
    JobConfig c;
    c.model = detail::resolve_model(j.at("model"), base);
    c.data = detail::resolve_data(j.at("data"), base);
    c.epsilon = j.value("epsilon", 0.1 * (c.data.u_max - c.data.u_min));
    c.n_u = j.value("n_u", c.n_u);
    c.n_v = j.value("n_v", c.n_v);
    c.solver.scheme = parse_scheme(j.value("scheme", std::string("auto")));
    c.solver.filter = j.value("filter", c.solver.filter);
    c.solver.noise_floor = j.value("noise_floor", c.solver.noise_floor);
    c.solver.max_growth_factor = j.value("max_growth_factor", c.solver.max_growth_factor);
    c.solver.trust_margin = j.value("trust_margin", c.solver.trust_margin);
    const std::string form = j.value("formulation", std::string("all-three"));
    if (form == "all-three") {
      c.solver.formulation = Formulation::AllThree;
    } else if (form == "reduced") {
      c.solver.formulation = Formulation::Reduced;
    } else {
      throw ConfigError("formulation must be 'all-three' or 'reduced'");
    }
    c.flip_normal = j.value("flip_normal", false);
    c.validate_samples = j.value("validate_samples", c.validate_samples);
    if (j.contains("thresholds")) {
      const json& t = j.at("thresholds");
      detail::reject_unknown_keys(t,
                                  {"boundary_position", "boundary_normal", "conformality", "mean_curvature",
                                   "constraint_drift", "integrability", "frame_holomorphicity",
                                   "holomorphicity_agreement"},
                                  "thresholds");
      Thresholds& th = c.thresholds;
      th.boundary_position = t.value("boundary_position", th.boundary_position);
      th.boundary_normal = t.value("boundary_normal", th.boundary_normal);
      th.conformality = t.value("conformality", th.conformality);
      th.mean_curvature = t.value("mean_curvature", th.mean_curvature);
      th.constraint_drift = t.value("constraint_drift", th.constraint_drift);
      th.integrability = t.value("integrability", th.integrability);
      th.frame_holomorphicity = t.value("frame_holomorphicity", th.frame_holomorphicity);
      th.holomorphicity_agreement = t.value("holomorphicity_agreement", th.holomorphicity_agreement);
    }
    if (j.contains("outputs")) {
      const json& o = j.at("outputs");
      detail::reject_unknown_keys(o, {"report", "mesh", "mesh_format", "field_dump", "patch_csv"}, "outputs");
      c.outputs.report = o.value("report", c.outputs.report);
      c.outputs.mesh = o.value("mesh", std::string());
      c.outputs.field_dump = o.value("field_dump", std::string());
      c.outputs.patch_csv = o.value("patch_csv", std::string());
      std::string fmt = o.value("mesh_format", std::string());
      if (fmt.empty()) {
        const std::string ext = std::filesystem::path(c.outputs.mesh).extension().string();
        fmt = ext == ".ply" ? "ply" : "obj";
      }
      c.outputs.mesh_format = parse_mesh_format(fmt);
    }
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (c.validate_samples < 2) throw ConfigError("validate_samples must be at least 2");
    c.solver.validate();

    const auto& th = c.thresholds;
    c.canonical = {{"model", detail::model_spec_to_json(c.model)},
                   {"data", detail::data_spec_to_json(c.data)},
                   {"epsilon", c.epsilon},
                   {"n_u", c.n_u},
                   {"n_v", c.n_v},
                   {"scheme", scheme_name(c.solver.scheme)},
                   {"filter", c.solver.filter},
                   {"noise_floor", c.solver.noise_floor},
                   {"max_growth_factor", c.solver.max_growth_factor},
                   {"trust_margin", c.solver.trust_margin},
                   {"formulation", form},
                   {"flip_normal", c.flip_normal},
                   {"thresholds",
                    {{"boundary_position", th.boundary_position},
                     {"boundary_normal", th.boundary_normal},
                     {"conformality", th.conformality},
                     {"mean_curvature", th.mean_curvature},
                     {"constraint_drift", th.constraint_drift},
                     {"integrability", th.integrability},
                     {"frame_holomorphicity", th.frame_holomorphicity},
                     {"holomorphicity_agreement", th.holomorphicity_agreement}}}};
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid job config: ") + e.what());
  }
}

inline JobConfig load_job_config(const std::filesystem::path& path) {
  const json j = detail::read_json_file(path);
  return job_config_from_json(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
inline std::string config_hash(const JobConfig& c) {
  const std::string text = c.canonical.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline StripGrid grid_from_config(const JobConfig& c) {
  StripGrid g;
  g.n_u = c.n_u;
  g.n_v = c.n_v;
  g.epsilon = c.epsilon;
  g.u_min = c.data.u_min;
  g.u_max = c.data.u_max;
  g.periodic = c.data.periodic;
  g.u0 = c.data.u_min;
  g.validate();
  return g;
}

// ---- field dump -----------------------------------------------------------

/// CSV: i,j,u,v,re_psi1,im_psi1,re_psi2,im_psi2,re_psi3,im_psi3,trust
inline void write_field_csv(const SpinorField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const StripGrid& g = field.grid;
  out << "i,j,u,v,re_psi1,im_psi1,re_psi2,im_psi2,re_psi3,im_psi3,trust\n";
  char buf[512];
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const Spinor& p = field.at(i, j);
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i, j, g.u(i),
                    g.v(j), p[0].real(), p[0].imag(), p[1].real(), p[1].imag(), p[2].real(), p[2].imag(),
                    field.is_trusted(i, j) ? 1 : 0);
      out << buf;
    }
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

/// Reads a field dump onto `grid`. The trust column is optional; without it
/// every node is trusted. Node coordinates must match the grid.
inline SpinorField read_field_csv(const std::string& path, const StripGrid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field dump '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("field dump '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const std::vector<std::string> required = {"i", "j", "u", "v", "re_psi1", "im_psi1",
                                             "re_psi2", "im_psi2", "re_psi3", "im_psi3"};
  if (header.size() < required.size() || !std::equal(required.begin(), required.end(), header.begin())) {
    throw ConfigError("field dump header must start with i,j,u,v,re_psi1,im_psi1,re_psi2,im_psi2,re_psi3,im_psi3");
  }
  const bool has_trust = header.size() > required.size() && header[required.size()] == "trust";
  SpinorField field(grid);
  std::vector<std::uint8_t> seen(grid.size(), 0);
  int line_no = 1;
  const double tol = 1e-9 * std::fmax(1.0, std::fmax(std::fabs(grid.u_min), std::fabs(grid.u_max)));
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < required.size() + (has_trust ? 1 : 0)) {
      throw ConfigError("field dump line " + std::to_string(line_no) + ": too few columns");
    }
    try {
      const int i = std::stoi(cells[0]);
      const int j = std::stoi(cells[1]);
      if (i < 0 || i >= grid.n_u || j < 0 || j >= grid.rows()) throw ConfigError("node index out of range");
      const double u = std::stod(cells[2]);
      const double v = std::stod(cells[3]);
      if (std::fabs(u - grid.u(i)) > tol || std::fabs(v - grid.v(j)) > tol) {
        throw ConfigError("node coordinates do not match the configured grid");
      }
      Spinor p;
      for (int c = 0; c < 3; ++c) p[c] = cplx(std::stod(cells[4 + 2 * c]), std::stod(cells[5 + 2 * c]));
      const std::size_t n = grid.index(i, j);
      if (seen[n]) throw ConfigError("duplicate node");
      seen[n] = 1;
      field.values[n] = p;
      field.trusted[n] = has_trust ? static_cast<std::uint8_t>(std::stoi(cells[10]) != 0) : 1;
    } catch (const ConfigError& e) {
      throw ConfigError("field dump line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception&) {
      throw ConfigError("field dump line " + std::to_string(line_no) + ": malformed number");
    }
  }
  for (std::size_t n = 0; n < seen.size(); ++n) {
    if (!seen[n]) throw ConfigError("field dump is missing nodes (expected " + std::to_string(grid.size()) + ")");
  }
  return field;
}

// ---- report serialization ------------------------------------------------

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const ResidualReport& r) {
  return {{"name", r.name},
          {"max", number_or_null(r.max)},
          {"rms", number_or_null(r.rms)},
          {"worst_node", {r.worst_node[0], r.worst_node[1]}},
          {"evaluated_nodes", r.evaluated_nodes},
          {"excluded_nodes", r.excluded_nodes}};
}

inline json to_json(const DataCertificate& c) {
  return {{"n_samples", c.n_samples},
          {"max_unit_defect", number_or_null(c.max_unit_defect)},
          {"max_orthogonality", number_or_null(c.max_orthogonality)},
          {"min_speed", number_or_null(c.min_speed)},
          {"valid", c.valid()},
          {"violations", c.violations}};
}

inline json to_json(const VerificationReport& r) {
  json res;
  res["conformality_e_minus_g"] = to_json(r.conformality.e_minus_g);
  res["conformality_f"] = to_json(r.conformality.f);
  res["conformality_raw"] = {{"e_minus_g", number_or_null(r.conformality.e_minus_g_raw)},
                             {"f", number_or_null(r.conformality.f_raw)}};
  res["boundary_position"] = to_json(r.boundary.position);
  res["boundary_normal"] = to_json(r.boundary.normal);
  res["mean_curvature"] = r.mean_curvature ? to_json(*r.mean_curvature) : json(nullptr);
  if (!r.mean_curvature_error.empty()) res["mean_curvature_error"] = r.mean_curvature_error;
  res["regularity_margin"] = number_or_null(r.regularity_margin);
  res["constraint_drift"] = to_json(r.constraint_drift);
  res["integrability"] = to_json(r.integrability);
  json fh = json::array(), ch = json::array();
  for (int c = 0; c < 3; ++c) {
    fh.push_back(to_json(r.frame_holomorphicity[c]));
    ch.push_back(to_json(r.coordinate_holomorphicity[c]));
  }
  res["frame_holomorphicity"] = fh;
  res["coordinate_holomorphicity"] = ch;
  res["implied_third"] = {{"eq3", to_json(r.implied_third.eq3)},
                          {"eq12_max", number_or_null(r.implied_third.eq12_max)},
                          {"worst_ratio", number_or_null(r.implied_third.worst_ratio)},
                          {"holds", r.implied_third.holds}};
  res["degenerate_normals"] = r.degenerate_normals;
  return res;
}

inline json checks_to_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const Check& c : checks) {
    out.push_back({{"name", c.name},
                   {"value", number_or_null(c.value)},
                   {"threshold", number_or_null(c.threshold)},
                   {"passed", c.passed}});
  }
  return out;
}

}  // namespace bjorling
