#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qgbec::cli {

enum class TheorySelector { Quantum, Classical, Both };
enum class OutputFormat { Csv, Json };

struct SpeciesSpec {
  std::string name = "Yb-174";
  // Inline definition when mass_u is present; otherwise overrides on a
  // registry entry.
  std::optional<double> mass_u;
  std::optional<double> a_s_nm;
  std::optional<double> three_body_rate_m6_per_s;

  bool operator==(const SpeciesSpec&) const = default;
};

struct TemperatureSweep {
  double start_K = 0.0;
  double stop_K = 0.0;
  int points = 1;

  bool operator==(const TemperatureSweep&) const = default;
};

/// Everything a run needs. Numeric keys carry their unit in the JSON name.
struct RunConfig {
  std::string command;
  SpeciesSpec species;
  std::optional<std::string> species_file;
  double N_atoms = 1e16;
  double L_m = 0.01;
  std::optional<double> T_K;
  std::optional<TemperatureSweep> T_sweep_K;
  TheorySelector theory = TheorySelector::Both;
  std::optional<double> g_em_override_J_m3;
  double rel_tol = 1e-9;
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> output_path;
  int threads = 0;

  int max_n2 = 27;
  std::int64_t n_k2 = 1;
  double deviation_percent = 0.1;
  double cv_target_over_kB = 3.164;
  std::string oracle_op = "heatcap";
  int oracle_grid_cells = 64;
  std::optional<std::int64_t> shell_cutoff;
  std::vector<double> scan_N_atoms;
  std::vector<double> scan_L_m;
  std::vector<double> scan_T_K;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::ordered_json to_json(const RunConfig& config);
/// Throws qgbec::Error(InvalidParameters) on unknown keys or bad values.
RunConfig config_from_json(const nlohmann::json& j);

std::string_view to_string(TheorySelector t) noexcept;
std::string_view to_string(OutputFormat f) noexcept;

/// Entry point. args excludes the program name. Returns 0 on success, 1 on
/// physics errors (machine-readable object on err), 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qgbec::cli
