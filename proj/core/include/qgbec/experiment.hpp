#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgbec/constants.hpp"
#include "qgbec/cube_potential.hpp"
#include "qgbec/errors.hpp"
#include "qgbec/spectrum.hpp"
#include "qgbec/thermo.hpp"

namespace qgbec::experiment {

enum class Observable { Energy, HeatCapacity };

/// Quantum vs classical comparison of one observable at identical inputs.
/// For Energy, classical/quantum are epsilon in J; for HeatCapacity they are
/// c_V / k_B.
struct DeviationReport {
  Observable observable;
  std::optional<cube::ModeIndex> mode;
  std::optional<double> temperature;
  double classical;
  double quantum;
  double rel_deviation_percent;  // 100 |quantum - classical| / classical
  std::int64_t shells_classical = 0;
  std::int64_t shells_quantum = 0;
};

DeviationReport energy_deviation(const spectrum::CouplingSet& couplings, cube::ModeIndex mode);
DeviationReport energy_deviation(const units::GasParameters& params, cube::ModeIndex mode);

/// Both theories at one temperature, classical evaluated first. When both c_V
/// vanish the deviation is 0; a vanishing classical c_V with a nonzero quantum
/// one throws NonFinite.
DeviationReport heatcap_deviation(const spectrum::CouplingSet& couplings, double temperature,
                                  const thermo::ThermoOptions& options = {});
DeviationReport heatcap_deviation(const units::GasParameters& params, double temperature,
                                  const thermo::ThermoOptions& options = {});

struct NlThresholdReport {
  double nl;  // atom count times box length, m
  std::int64_t n_k2;
  double deviation_percent;
  std::string species;
  /// Literature figure for this exact configuration, if one exists, and
  /// whether it agrees with the formula to 5%.
  std::optional<double> quoted_value;
  std::optional<bool> quoted_consistent;
};

/// NL = (deviation_percent / 0.1) pi^2 hbar^2 n_k2 / (2380 G m^3).
/// Throws InvalidParameters for n_k2 < 1 or deviation_percent <= 0.
NlThresholdReport nl_threshold(const units::Species& species, std::int64_t n_k2, double deviation_percent);

/// Quoted NL for Yb-174 at n_k2 = 1 and 0.1 %.
inline constexpr double kQuotedYbThreshold = 2.9e14;

struct ReconcileResult {
  double g_em;  // fitted J m^3
  double cv_classical_over_kB;
  double cv_quantum_over_kB;
  double deviation_percent;
  spectrum::Regime regime;  // at the fitted g_em
  int iterations;
};

struct ReconcileOptions {
  double rel_tol = 1e-6;  // on g_em
  int max_iterations = 200;
  thermo::ThermoOptions thermo{};
};

/// Bisection on log g_em for c_V^CG / k_B = target. The g_em of params is
/// ignored. Throws NoBracket when the target is not strictly between 0 and
/// the free-gas value.
ReconcileResult reconcile_cv_target(const units::GasParameters& params, double temperature,
                                    double cv_target_over_kB, const ReconcileOptions& options = {});

struct ValidityFlag {
  std::string name;
  bool passed;
};

struct ValidityReport {
  double diluteness;            // n |a_s|^3
  double relativistic_radius;   // 1e9 G N m / c^2, m
  double schwarzschild_ratio;   // L / (G N m / c^2)
  std::optional<double> three_body_half_life;  // s; absent when the rate is 0
  double estimated_velocity;    // hbar n^{1/3} / m, m/s
  std::vector<ValidityFlag> flags;

  bool all_passed() const;
};

ValidityReport validity_report(const units::GasParameters& params);

/// Geometric sequence start, ..., stop with the given number of points.
std::vector<double> geometric_range(double start, double stop, int points);

struct ScanGrid {
  std::vector<double> atom_counts;
  std::vector<double> box_lengths_m;
  std::vector<double> temperatures_K;
};

struct ScanError {
  ErrorKind kind;
  std::string message;
};

struct ScanRow {
  double atom_count;
  double box_length_m;
  double temperature_K;
  std::optional<DeviationReport> heatcap;
  std::optional<DeviationReport> energy;  // mode (1,0,0)
  std::optional<ValidityReport> validity;
  std::optional<ScanError> error;
};

/// Rows in lexicographic (N, L, T) order, evaluated in parallel. Failures are
/// recorded per row and never abort the scan.
std::vector<ScanRow> scan(const units::Species& species, std::optional<double> g_em_override,
                          const ScanGrid& grid, const thermo::ThermoOptions& options = {});

}  // namespace qgbec::experiment
