// Command-line driver: solve, density, sweep, energy. Every command writes
// its outputs plus a run manifest into --out (or $MIW_OUT_DIR) and prints a
// one-line summary. Exit codes: 0 success, 1 computation failure, 2 usage.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "miw/density.hpp"
#include "miw/energy.hpp"
#include "miw/harness.hpp"
#include "miw/io.hpp"
#include "miw/model.hpp"
#include "miw/solver.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  double tolerance = 1e-12;
  std::string precision = "extended";
  std::string format = "csv";
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_format) {
  cmd->add_option("--tol", opts.tolerance, "residual tolerance on F(x1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--precision", opts.precision, "accumulation mode")
      ->check(CLI::IsMember({"standard", "extended"}))
      ->capture_default_str();
  if (with_format)
    cmd->add_option("--format", opts.format, "table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  cmd->add_option("--out", opts.out_dir, "output directory")
      ->envname("MIW_OUT_DIR")
      ->capture_default_str();
}

miw::SolverConfig to_config(const CommonOptions& opts) {
  miw::SolverConfig config;
  config.tolerance = opts.tolerance;
  config.precision =
      opts.precision == "standard" ? miw::Precision::standard : miw::Precision::extended;
  return config;
}

fs::path prepare_out_dir(const CommonOptions& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

int parse_int_strict(const std::string& s) {
  std::size_t idx = 0;
  int v = 0;
  try {
    v = std::stoi(s, &idx);
  } catch (...) {
    throw std::invalid_argument("--n: not an integer: '" + s + "'");
  }
  if (idx != s.size()) throw std::invalid_argument("--n: trailing characters in '" + s + "'");
  return v;
}

// Comma-separated entries, each a single count or an inclusive range a..b.
std::vector<int> parse_n_spec(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("--n: empty N list");
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    std::size_t end = comma == std::string::npos ? spec.size() : comma;
    std::string token = spec.substr(pos, end - pos);
    if (token.empty()) throw std::invalid_argument("--n: empty entry in N list");
    std::size_t dots = token.find("..");
    if (dots == std::string::npos) {
      int n = parse_int_strict(token);
      if (n < 1) throw std::invalid_argument("--n: counts must be >= 1");
      out.push_back(n);
    } else {
      int a = parse_int_strict(token.substr(0, dots));
      int b = parse_int_strict(token.substr(dots + 2));
      if (a < 1 || b < a) throw std::invalid_argument("--n: bad range '" + token + "'");
      if (b - a > 100000) throw std::invalid_argument("--n: range '" + token + "' too large");
      for (int n = a; n <= b; ++n) out.push_back(n);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

miw::RunManifest make_manifest(const std::string& command, const CommonOptions& opts) {
  miw::RunManifest m;
  m.command = command;
  m.timestamp_utc = miw::utc_timestamp();
  m.parameters["tol"] = miw::format_full(opts.tolerance);
  m.parameters["precision"] = opts.precision;
  m.parameters["out"] = opts.out_dir;
  return m;
}

int run_solve(int n, const CommonOptions& opts) {
  fs::path dir = prepare_out_dir(opts);
  miw::WorldConfiguration cfg = miw::solve_configuration(n, to_config(opts));
  miw::ValidationReport validation = miw::validate_configuration(cfg);

  fs::path positions_path = dir / (opts.format == "json" ? "positions.json" : "positions.csv");
  if (opts.format == "json")
    miw::write_positions_json(positions_path, cfg);
  else
    miw::write_positions_csv(positions_path, cfg);
  fs::path validation_path = dir / "validation.json";
  write_json_file(validation_path, nlohmann::ordered_json(validation));

  miw::RunManifest manifest = make_manifest("solve", opts);
  manifest.parameters["n"] = std::to_string(n);
  manifest.parameters["format"] = opts.format;
  manifest.outputs = {positions_path.filename().string(), validation_path.filename().string()};
  write_manifest(dir / "solve_manifest.json", manifest);

  if (cfg.solve_meta.sign_changes > 1)
    std::cerr << "warning: " << cfg.solve_meta.sign_changes
              << " sign changes seen while bracketing; root may not be unique\n";
  std::cout << "N=" << n << " x1=" << miw::format_full(cfg.positions.front())
            << " xN=" << miw::format_full(cfg.positions.back())
            << " |F|=" << miw::format_full(std::abs(cfg.x1_residual))
            << " evaluations=" << cfg.solve_meta.evaluations
            << " validation=" << (validation.all_passed ? "PASS" : "FAIL") << '\n';
  return validation.all_passed ? 0 : 1;
}

miw::WorldConfiguration load_or_solve(int n, const std::string& config_path,
                                      const CommonOptions& opts) {
  if (!config_path.empty()) return miw::read_configuration(config_path);
  if (n < 1)
    throw std::invalid_argument("provide either --n or --config");
  return miw::solve_configuration(n, to_config(opts));
}

// Table of (x, empirical, target) rows, ascending in x, with breakpoints
// emitted twice (left limit then right limit) so the steps render exactly.
void density_rows(const miw::StepDensity& d, int grid, bool full_line,
                  std::vector<std::array<double, 3>>& rows) {
  double x_max = 1.2 * d.breakpoints.front();
  double x_min = full_line ? -x_max : 0.0;
  std::vector<double> xs;
  for (int i = 0; i <= grid; ++i) xs.push_back(x_min + (x_max - x_min) * i / grid);
  for (double b : d.breakpoints) {
    xs.push_back(b);
    if (full_line) xs.push_back(-b);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    double left = d(x);
    double right = d(std::nextafter(x, miw::infinite_endpoint));
    rows.push_back({x, left, miw::target_density(x)});
    if (right != left) rows.push_back({x, right, miw::target_density(x)});
  }
}

int run_density(int n, const std::string& config_path, int grid, bool full_line,
                const CommonOptions& opts) {
  fs::path dir = prepare_out_dir(opts);
  miw::WorldConfiguration cfg = load_or_solve(n, config_path, opts);
  miw::StepDensity d = miw::build_step_density(cfg, !full_line);

  std::vector<std::array<double, 3>> rows;
  density_rows(d, grid, full_line, rows);

  fs::path table_path = dir / (opts.format == "json" ? "density.json" : "density.csv");
  if (opts.format == "json") {
    nlohmann::ordered_json j;
    for (auto& r : rows) {
      j["x"].push_back(r[0]);
      j["p_empirical"].push_back(r[1]);
      j["p_target"].push_back(r[2]);
    }
    write_json_file(table_path, j);
  } else {
    std::ofstream out(table_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + table_path.string());
    out << "x,p_empirical,p_target\n";
    for (auto& r : rows)
      out << miw::format_full(r[0]) << ',' << miw::format_full(r[1]) << ','
          << miw::format_full(r[2]) << '\n';
  }

  double mass = miw::empirical_mass(d, false);
  double mass_b = miw::empirical_mass(d, true);
  double integral = miw::empirical_integral(d);
  double l1 = miw::density_distance(d, miw::TargetDensity{}, miw::DistanceMetric::l1);
  double sup = miw::density_distance(d, miw::TargetDensity{}, miw::DistanceMetric::sup);
  double deficit = miw::density_distance(d, miw::TargetDensity{}, miw::DistanceMetric::mass_deficit);
  nlohmann::ordered_json summary = {
      {"n_worlds", cfg.n_worlds},
      {"x1", cfg.positions.front()},
      {"xn", cfg.positions.back()},
      {"grid", grid},
      {"full_line", full_line},
      {"mass_no_boundary", mass},
      {"mass_with_boundary", mass_b},
      {"integral", integral},
      {"mass_deficit", deficit},
      {"l1_distance", l1},
      {"sup_distance", sup},
  };
  fs::path summary_path = dir / "density_summary.json";
  write_json_file(summary_path, summary);

  miw::RunManifest manifest = make_manifest("density", opts);
  if (!config_path.empty())
    manifest.inputs.push_back(config_path);
  else
    manifest.parameters["n"] = std::to_string(n);
  manifest.parameters["grid"] = std::to_string(grid);
  manifest.parameters["full_line"] = full_line ? "true" : "false";
  manifest.parameters["format"] = opts.format;
  manifest.outputs = {table_path.filename().string(), summary_path.filename().string()};
  write_manifest(dir / "density_manifest.json", manifest);

  std::cout << "N=" << cfg.n_worlds << " mass=" << miw::format_full(mass)
            << " mass+boundary=" << miw::format_full(mass_b)
            << " integral=" << miw::format_full(integral) << " L1=" << miw::format_full(l1)
            << " rows=" << rows.size() << '\n';
  return 0;
}

int run_energy(int n, const std::string& config_path, const CommonOptions& opts) {
  fs::path dir = prepare_out_dir(opts);
  miw::WorldConfiguration cfg = load_or_solve(n, config_path, opts);
  miw::EnergyReport report = miw::average_hamiltonian(cfg);

  fs::path energy_path = dir / "energy.json";
  write_json_file(energy_path, nlohmann::ordered_json(report));

  miw::RunManifest manifest = make_manifest("energy", opts);
  if (!config_path.empty())
    manifest.inputs.push_back(config_path);
  else
    manifest.parameters["n"] = std::to_string(n);
  manifest.outputs = {energy_path.filename().string()};
  write_manifest(dir / "energy_manifest.json", manifest);

  std::cout << "N=" << cfg.n_worlds << " U=" << miw::format_full(report.interworld)
            << " V=" << miw::format_full(report.coulomb)
            << " H=" << miw::format_full(report.average_h)
            << " bound=" << miw::format_full(report.lower_bound) << '\n';
  return 0;
}

const char* sweep_csv_header =
    "n_worlds,x1,xn,mass_no_boundary,mass_with_boundary,integral,average_h,interworld,coulomb,"
    "condition2_residual,boundary_residual,wall_time,error";

int run_sweep(const std::string& spec, int jobs, const CommonOptions& opts) {
  fs::path dir = prepare_out_dir(opts);
  std::vector<int> n_values = parse_n_spec(spec);
  std::vector<miw::SweepEntry> entries = miw::sweep(n_values, to_config(opts), jobs);

  std::vector<miw::ConvergenceRecord> records;
  int failed = 0;
  for (const auto& e : entries) {
    if (e.record)
      records.push_back(*e.record);
    else
      ++failed;
  }

  fs::path table_path = dir / (opts.format == "json" ? "sweep.json" : "sweep.csv");
  if (opts.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      nlohmann::ordered_json row;
      if (e.record)
        row = *e.record;
      else
        row = {{"n_worlds", e.n_worlds}};
      row["error"] = e.error;
      j.push_back(row);
    }
    write_json_file(table_path, j);
  } else {
    std::ofstream out(table_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + table_path.string());
    out << sweep_csv_header << '\n';
    for (const auto& e : entries) {
      if (e.record) {
        const auto& r = *e.record;
        out << r.n_worlds << ',' << miw::format_full(r.x1) << ',' << miw::format_full(r.xn) << ','
            << miw::format_full(r.mass_no_boundary) << ','
            << miw::format_full(r.mass_with_boundary) << ',' << miw::format_full(r.integral)
            << ',' << miw::format_full(r.average_h) << ',' << miw::format_full(r.interworld)
            << ',' << miw::format_full(r.coulomb) << ','
            << miw::format_full(r.condition2_residual) << ','
            << miw::format_full(r.boundary_residual) << ',' << miw::format_full(r.wall_time)
            << ",\n";
      } else {
        out << e.n_worlds << ",,,,,,,,,,,," << csv_quote(e.error) << '\n';
      }
    }
  }

  nlohmann::ordered_json report;
  report["requested"] = entries.size();
  report["succeeded"] = records.size();
  report["failed"] = failed;
  try {
    report["fit"] = miw::fit_xn_scaling(records);
  } catch (const std::exception& e) {
    report["fit"] = nullptr;
    report["fit_skipped"] = e.what();
  }
  try {
    report["sandwich"] = miw::check_mass_sandwich(records);
  } catch (const std::exception& e) {
    report["sandwich"] = nullptr;
    report["sandwich_skipped"] = e.what();
  }
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  for (const auto& e : entries)
    if (!e.record) errors.push_back({{"n_worlds", e.n_worlds}, {"error", e.error}});
  report["errors"] = errors;
  fs::path report_path = dir / "sweep_report.json";
  write_json_file(report_path, report);

  miw::RunManifest manifest = make_manifest("sweep", opts);
  manifest.parameters["n"] = spec;
  manifest.parameters["jobs"] = std::to_string(jobs);
  manifest.parameters["format"] = opts.format;
  manifest.outputs = {table_path.filename().string(), report_path.filename().string()};
  write_manifest(dir / "sweep_manifest.json", manifest);

  std::cout << "sweep: " << entries.size() << " requested, " << records.size() << " ok, "
            << failed << " failed";
  if (report["fit"].is_object())
    std::cout << ", a=" << miw::format_full(report["fit"]["exponent_a"].get<double>());
  std::cout << '\n';
  return failed > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-interacting-worlds toolkit for the 1d Coulomb first excited state"};
  app.set_version_flag("--version", miw::tool_version);
  app.require_subcommand(1);

  CommonOptions solve_opts, density_opts, sweep_opts, energy_opts;

  auto* solve = app.add_subcommand("solve", "solve the N-world configuration and validate it");
  int solve_n = 0;
  solve->add_option("--n", solve_n, "world count")->required()->check(CLI::PositiveNumber);
  add_common(solve, solve_opts, true);

  auto* density = app.add_subcommand("density", "empirical step density and distance metrics");
  int density_n = 0;
  std::string density_config;
  int grid = 512;
  bool full_line = false;
  auto* density_n_opt =
      density->add_option("--n", density_n, "world count")->check(CLI::PositiveNumber);
  auto* density_cfg_opt = density->add_option("--config", density_config, "positions file")
                              ->check(CLI::ExistingFile);
  density_n_opt->excludes(density_cfg_opt);
  density_cfg_opt->excludes(density_n_opt);
  density->add_option("--grid", grid, "sample points")->check(CLI::Range(2, 1 << 22))
      ->capture_default_str();
  density->add_flag("--full-line", full_line, "mirror onto the negative axis");
  add_common(density, density_opts, true);

  auto* sweepcmd = app.add_subcommand("sweep", "convergence study over a ladder of N");
  std::string sweep_spec;
  int jobs = 1;
  sweepcmd->add_option("--n", sweep_spec, "N list, e.g. 11,21 or 1..200")->required();
  sweepcmd->add_option("--jobs", jobs, "concurrent solves")->check(CLI::Range(1, 1024))
      ->capture_default_str();
  add_common(sweepcmd, sweep_opts, true);

  auto* energy = app.add_subcommand("energy", "interworld and Coulomb potentials, average H");
  int energy_n = 0;
  std::string energy_config;
  auto* energy_n_opt =
      energy->add_option("--n", energy_n, "world count")->check(CLI::PositiveNumber);
  auto* energy_cfg_opt = energy->add_option("--config", energy_config, "positions file")
                             ->check(CLI::ExistingFile);
  energy_n_opt->excludes(energy_cfg_opt);
  energy_cfg_opt->excludes(energy_n_opt);
  add_common(energy, energy_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return run_solve(solve_n, solve_opts);
    if (*density) return run_density(density_n, density_config, grid, full_line, density_opts);
    if (*sweepcmd) return run_sweep(sweep_spec, jobs, sweep_opts);
    if (*energy) return run_energy(energy_n, energy_config, energy_opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
