#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakkam/cohomology.hpp"
#include "weakkam/cost_system.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/lagrangian.hpp"

namespace weakkam {

// Missing or malformed input files.  Kept apart from validation_error so the
// CLI can map "your file is broken" to a usage exit and "your system violates
// a precondition" to a computation exit.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// All human-facing numeric output goes through this: 12 significant digits,
// locale-independent.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // never print "-0"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline nlohmann::json system_to_json(const cost_system<double>& sys) {
  nlohmann::json j;
  j["n"] = sys.n();
  j["winding_dim"] = sys.winding_dim();
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : sys.edges()) {
    nlohmann::json je{{"from", e.from}, {"to", e.to}, {"cost", e.cost}};
    if (sys.winding_dim() > 0) je["winding"] = e.winding;
    edges.push_back(std::move(je));
  }
  if (!sys.labels.empty()) j["labels"] = sys.labels;
  if (!sys.coords.empty()) j["coords"] = sys.coords;
  return j;
}

inline cost_system<double> system_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
    throw io_error("graph file must be an object with \"n\" and \"edges\"");
  if (!j["n"].is_number_integer() || j["n"].get<int>() <= 0)
    throw io_error("\"n\" must be a positive integer");
  const int n = j["n"].get<int>();
  const int wdim = j.value("winding_dim", 0);
  if (wdim < 0) throw io_error("\"winding_dim\" must be >= 0");
  cost_system<double> sys(n, wdim);
  if (!j["edges"].is_array()) throw io_error("\"edges\" must be an array");
  for (const auto& je : j["edges"]) {
    if (!je.contains("from") || !je.contains("to") || !je.contains("cost"))
      throw io_error("every edge needs \"from\", \"to\", \"cost\"");
    std::vector<std::int64_t> w;
    if (je.contains("winding")) w = je["winding"].get<std::vector<std::int64_t>>();
    try {
      sys.add_edge(je["from"].get<int>(), je["to"].get<int>(), je["cost"].get<double>(),
                   std::move(w));
    } catch (const validation_error& err) {
      // out-of-range states, duplicate pairs, winding length: file is malformed
      throw io_error(std::string("bad edge: ") + err.what());
    }
  }
  if (j.contains("labels")) {
    sys.labels = j["labels"].get<std::vector<std::string>>();
    if (static_cast<int>(sys.labels.size()) != n) throw io_error("labels must have length n");
  }
  if (j.contains("coords")) {
    sys.coords = j["coords"].get<std::vector<std::vector<double>>>();
    if (static_cast<int>(sys.coords.size()) != n) throw io_error("coords must have length n");
  }
  sys.validate();  // connectivity violations surface as validation_error
  return sys;
}

inline cost_system<double> load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path + ": " + e.what());
  }
  try {
    return system_from_json(j);
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

inline void save_system(const cost_system<double>& sys, std::ostream& out) {
  out << system_to_json(sys).dump(2) << "\n";
}

inline void save_system(const cost_system<double>& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  save_system(sys, out);
}

inline void write_values_csv(std::ostream& out, const std::vector<double>& values) {
  out << "state,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i << "," << format_number(values[i]) << "\n";
}

// Lifted values on a cover: one row per (state, deck index), the deck index
// rendered as colon-joined coordinates.
inline void write_lifted_csv(std::ostream& out, const cover_window<double>& cover,
                             const std::vector<double>& values) {
  out << "state,deck,value\n";
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const auto [state, g] = cover.split_index(static_cast<int>(idx));
    out << state << ",";
    for (std::size_t k = 0; k < g.size(); ++k) out << (k ? ":" : "") << g[k];
    out << "," << format_number(values[idx]) << "\n";
  }
}

struct lagrangian_config {
  lagrangian_spec spec;
  int grid = 64;
};

inline lagrangian_config lagrangian_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw io_error("Lagrangian config must be a JSON object");
  lagrangian_config cfg;
  if (j.contains("cosine_coeffs"))
    cfg.spec.cosine_coeffs = j["cosine_coeffs"].get<std::vector<double>>();
  if (j.contains("sine_coeffs"))
    cfg.spec.sine_coeffs = j["sine_coeffs"].get<std::vector<double>>();
  cfg.spec.collocation_steps = j.value("collocation_steps", cfg.spec.collocation_steps);
  if (cfg.spec.collocation_steps < 2) throw io_error("collocation_steps must be >= 2");
  if (j.contains("integrator_steps")) {
    cfg.spec.integrator_steps = j["integrator_steps"].get<int>();
    if (cfg.spec.integrator_steps < 1) throw io_error("integrator_steps must be >= 1");
  }
  cfg.grid = j.value("grid", cfg.grid);
  if (cfg.grid < 8) throw io_error("grid must be >= 8");
  return cfg;
}

inline lagrangian_config load_lagrangian_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path + ": " + e.what());
  }
  try {
    return lagrangian_config_from_json(j);
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

}  // namespace weakkam
