#pragma once

// Serialization: full-fidelity number formatting, the positions file in CSV
// and JSON form, JSON adapters for the report types, and the run manifest
// written alongside every command's outputs.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "miw/energy.hpp"
#include "miw/harness.hpp"
#include "miw/model.hpp"
#include "miw/solver.hpp"

namespace miw {

inline constexpr const char* tool_version = "0.1.0";

// 17 significant digits: enough for exact double round-trips.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

}  // namespace detail

inline void to_json(nlohmann::ordered_json& j, const SolveMeta& m) {
  j = {{"evaluations", m.evaluations}, {"bracket_lo", m.bracket_lo},
       {"bracket_hi", m.bracket_hi},   {"sign_changes", m.sign_changes},
       {"precision", to_string(m.precision)}, {"tolerance", m.tolerance}};
}

inline void to_json(nlohmann::ordered_json& j, const WorldConfiguration& cfg) {
  j = {{"n_worlds", cfg.n_worlds},
       {"positions", cfg.positions},
       {"x1_residual", cfg.x1_residual},
       {"solve_meta", cfg.solve_meta}};
}

inline void to_json(nlohmann::ordered_json& j, const ValidationCheck& c) {
  j = {{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}, {"limit", c.limit}};
}

inline void to_json(nlohmann::ordered_json& j, const ValidationReport& r) {
  j = {{"n_worlds", r.n_worlds},
       {"tolerance", r.tolerance},
       {"checks", r.checks},
       {"all_passed", r.all_passed}};
}

inline void to_json(nlohmann::ordered_json& j, const EnergyReport& r) {
  j = {{"n_worlds", r.n_worlds},       {"kinetic", r.kinetic},
       {"interworld", r.interworld},   {"coulomb", r.coulomb},
       {"average_h", r.average_h},     {"lower_bound", r.lower_bound},
       {"residual_u", r.residual_u},   {"residual_v", r.residual_v},
       {"residual_h", r.residual_h}};
}

inline void to_json(nlohmann::ordered_json& j, const ScalingFit& f) {
  j = {{"exponent_a", f.exponent_a}, {"fit_n", f.fit_n}, {"residual", f.residual}};
}

inline void to_json(nlohmann::ordered_json& j, const MassSandwichReport& r) {
  j = {{"lower_ok", r.lower_ok},
       {"upper_ok", r.upper_ok},
       {"deficit_monotone", r.deficit_monotone},
       {"monotonicity_violations", r.monotonicity_violations},
       {"passed", r.passed()}};
}

inline void to_json(nlohmann::ordered_json& j, const OdeLimitReport& r) {
  j = {{"n_worlds", r.n_worlds},
       {"max_discrepancy", r.max_discrepancy},
       {"envelope", r.envelope},
       {"max_identity_error", r.max_identity_error},
       {"within_envelope", r.within_envelope},
       {"identity_ok", r.identity_ok}};
}

inline void to_json(nlohmann::ordered_json& j, const ConvergenceRecord& r) {
  j = {{"n_worlds", r.n_worlds},
       {"x1", r.x1},
       {"xn", r.xn},
       {"mass_no_boundary", r.mass_no_boundary},
       {"mass_with_boundary", r.mass_with_boundary},
       {"integral", r.integral},
       {"average_h", r.average_h},
       {"interworld", r.interworld},
       {"coulomb", r.coulomb},
       {"condition2_residual", r.condition2_residual},
       {"boundary_residual", r.boundary_residual},
       {"wall_time", r.wall_time}};
}

// Positions file, CSV flavor: header "n,x_n", one row per world, full
// precision. Everything downstream is recomputable from the positions.
inline void write_positions_csv(const std::filesystem::path& path,
                                const WorldConfiguration& cfg) {
  auto out = detail::open_for_write(path);
  out << "n,x_n\n";
  for (int i = 0; i < cfg.n_worlds; ++i) out << (i + 1) << ',' << format_full(cfg.positions[i]) << '\n';
}

inline void write_positions_json(const std::filesystem::path& path,
                                 const WorldConfiguration& cfg) {
  auto out = detail::open_for_write(path);
  nlohmann::ordered_json j = cfg;
  out << j.dump(2) << '\n';
}

// Reads a positions file written by either writer, dispatching on the
// extension. CSV carries only positions; residual and metadata stay at
// defaults and consumers recompute what they need.
inline WorldConfiguration read_configuration(const std::filesystem::path& path) {
  WorldConfiguration cfg;
  if (path.extension() == ".json") {
    auto in = detail::open_for_read(path);
    nlohmann::json j = nlohmann::json::parse(in);
    cfg.n_worlds = j.at("n_worlds").get<int>();
    cfg.positions = j.at("positions").get<std::vector<double>>();
    cfg.x1_residual = j.value("x1_residual", 0.0);
    if (cfg.positions.size() != static_cast<std::size_t>(cfg.n_worlds))
      throw std::runtime_error("read_configuration: n_worlds does not match positions");
  } else if (path.extension() == ".csv") {
    auto in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("n,", 0) != 0)
      throw std::runtime_error("read_configuration: missing CSV header in " + path.string());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("read_configuration: malformed CSV row: " + line);
      cfg.positions.push_back(std::stod(line.substr(comma + 1)));
    }
    cfg.n_worlds = static_cast<int>(cfg.positions.size());
  } else {
    throw std::invalid_argument("read_configuration: expected a .csv or .json file, got " +
                                path.string());
  }
  if (cfg.n_worlds < 1) throw std::runtime_error("read_configuration: no positions in file");
  if (!has_valid_ordering(cfg.positions))
    throw std::runtime_error("read_configuration: positions are not strictly decreasing and positive");
  return cfg;
}

// Provenance sidecar written next to every command's outputs. Re-running the
// same command with the same parameters reproduces every output bit for bit;
// only this timestamp differs.
struct RunManifest {
  std::string command;
  std::string version = tool_version;
  std::string timestamp_utc;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

inline std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void to_json(nlohmann::ordered_json& j, const RunManifest& m) {
  j = {{"command", m.command},     {"version", m.version}, {"timestamp_utc", m.timestamp_utc},
       {"parameters", m.parameters}, {"inputs", m.inputs},   {"outputs", m.outputs}};
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  auto out = detail::open_for_write(path);
  nlohmann::ordered_json j = manifest;
  out << j.dump(2) << '\n';
}

}  // namespace miw
