#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "qlga/collision.hpp"
#include "qlga/error.hpp"
#include "qlga/evolve.hpp"

namespace qlga::config {

using nlohmann::json;

/// One config section with typed, strictly checked access. Values may be
/// JSON scalars or strings (INI input is all strings); lists are JSON arrays
/// or comma-separated strings.
class Section {
 public:
  Section(std::string name, json obj) : name_(std::move(name)), obj_(std::move(obj)) {
    if (obj_.is_null()) obj_ = json::object();
    if (!obj_.is_object()) throw ConfigError("section [" + name_ + "] must be a table of key/value pairs");
  }

  const std::string& name() const noexcept { return name_; }
  bool has(const std::string& key) const { return obj_.contains(key); }

  /// Rejects keys outside `allowed`.
  void restrict_to(std::initializer_list<const char*> allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj_.items())
      if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    double out = 0.0;
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_string()) {
      out = parse_double(v.get<std::string>(), key);
    } else {
      throw ConfigError(where(key) + " must be a number");
    }
    if (!std::isfinite(out)) throw ConfigError(where(key) + " must be finite");
    return out;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(where(key) + " must be an integer");
    return static_cast<long long>(v);
  }
  long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return trim(v.get<std::string>());
  }
  std::string text(const std::string& key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    std::vector<double> out;
    if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where(key) + " must be a list of numbers");
        out.push_back(e.get<double>());
      }
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_string()) {
      std::stringstream ss(v.get<std::string>());
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
    } else {
      throw ConfigError(where(key) + " must be a list of numbers");
    }
    for (double d : out)
      if (!std::isfinite(d)) throw ConfigError(where(key) + " entries must be finite");
    return out;
  }

 private:
  const json& at(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
    return obj_.at(key);
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  static std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }
  double parse_double(const std::string& raw, const std::string& key) const {
    const std::string s = trim(raw);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(where(key) + ": '" + s + "' is not a number");
    }
    if (used != s.size()) throw ConfigError(where(key) + ": '" + s + "' is not a number");
    return v;
  }

  std::string name_;
  json obj_;
};

/// Parsed configuration file: [model] and [run] sections.
struct RunConfig {
  Section model{"model", json::object()};
  Section run{"run", json::object()};
};

/// Reads an INI file (or a .json file with the same two-level layout).
inline RunConfig load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  json root;
  if (path.extension() == ".json") {
    std::ifstream in(path);
    try {
      root = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("malformed JSON config: " + std::string(e.what()));
    }
  } else {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("malformed config: " + std::string(e.what()));
    }
    root = json::object();
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside of a section");
      json obj = json::object();
      for (const auto& [key, value] : body) {
        // strip trailing comments
        std::string v = value.get_value<std::string>();
        const auto hash = v.find_first_of(";#");
        if (hash != std::string::npos) v = v.substr(0, hash);
        obj[key] = v;
      }
      root[section] = std::move(obj);
    }
  }
  if (!root.is_object()) throw ConfigError("config root must be a table");
  for (const auto& [key, _] : root.items())
    if (key != "model" && key != "run") throw ConfigError("unknown section [" + key + "]");
  RunConfig cfg;
  cfg.model = Section("model", root.contains("model") ? root["model"] : json::object());
  cfg.run = Section("run", root.contains("run") ? root["run"] : json::object());
  return cfg;
}

inline cplx phase_from_pi_units(double turns_of_pi) { return std::polar(1.0, std::numbers::pi * turns_of_pi); }

/// Builds and validates the model from [model]. Angles are in units of pi.
inline QlgaModel build_model(const Section& s) {
  s.restrict_to({"dimension", "q_lat", "theta", "phi", "mu", "nu", "lambda", "eps", "potential", "potential_a",
                 "pair_potential", "pair_coefficient", "pair_table"});
  const long long d = s.integer("dimension", 1);
  const long long q = s.integer("q_lat");
  if (d < 1 || d > 3) throw ConfigError("[model] dimension must be 1, 2 or 3");
  if (q < 2 || q > 1'000'000) throw ConfigError("[model] q_lat must be in [2, 1e6]");

  QlgaModel model;
  model.lattice = LatticeSpec(static_cast<int>(d), static_cast<int>(q));
  model.eps = s.number("eps", 1.0);
  if (!(model.eps > 0.0)) throw ConfigError("[model] eps must be positive");

  const bool one_d = s.has("theta");
  const bool irrep = s.has("mu") || s.has("nu") || s.has("lambda");
  if (one_d == irrep) throw ConfigError("[model] give either theta (1D rule) or mu, nu, lambda (D-dim rule)");
  if (one_d) {
    if (d != 1) throw ConfigError("[model] theta selects the 1D rule; use mu/nu/lambda for D > 1");
    model.collision = Collision1DParams(std::numbers::pi * s.number("theta"), phase_from_pi_units(s.number("phi", 0.0)));
  } else {
    if (s.has("phi")) throw ConfigError("[model] phi only applies to the 1D rule");
    model.collision = CollisionDDParams(phase_from_pi_units(s.number("mu")), phase_from_pi_units(s.number("nu")),
                                        phase_from_pi_units(s.number("lambda")), static_cast<int>(d));
  }

  const std::string pot = s.text("potential", "none");
  if (pot == "quadratic") {
    model.potential = quadratic_potential(s.number("potential_a"), model.eps);
  } else if (pot != "none") {
    throw ConfigError("[model] potential must be none or quadratic");
  } else if (s.has("potential_a")) {
    throw ConfigError("[model] potential_a given without potential = quadratic");
  }

  const std::string pair = s.text("pair_potential", "none");
  if (pair == "quadratic_distance") {
    model.pair_potential = quadratic_distance_potential(s.number("pair_coefficient"));
  } else if (pair == "table") {
    model.pair_potential = table_pair_potential(s.numbers("pair_table"), model.eps, static_cast<int>(q));
  } else if (pair != "none") {
    throw ConfigError("[model] pair_potential must be none, quadratic_distance or table");
  }
  if (model.pair_potential) check_pair_symmetry(*model.pair_potential, model.lattice, model.eps);

  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  return model;
}

}  // namespace qlga::config
