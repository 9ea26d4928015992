#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qgbec/constants.hpp"
#include "qgbec/spectrum.hpp"

namespace qgbec::thermo {

/// r3(s): number of integer vectors with nx^2 + ny^2 + nz^2 = s. r3(0) = 1.
/// Backed by a process-wide table that grows on demand; thread safe.
std::int64_t shell_multiplicity(std::int64_t s);

/// Immutable snapshot of r3 over [0, size). Valid for the caller's lifetime.
using ShellSnapshot = std::shared_ptr<const std::vector<std::int64_t>>;

/// Snapshot covering at least [0, s_max].
ShellSnapshot shell_table(std::int64_t s_max);

/// x^2 e^{-x} / (1 - e^{-x})^2, the per-mode contribution to c_V / k_B.
/// Series 1 - x^2/12 below 1e-4, zero above 745.
double mode_term(double epsilon, double temperature);
double mode_term_x(double x);

struct ThermoOptions {
  double rel_tol = 1e-9;
  std::int64_t shell_budget = 1'000'000;
  /// Sum exactly the shells 1..cutoff instead of running to convergence.
  std::optional<std::int64_t> fixed_cutoff;
};

struct ThermoResult {
  double temperature;              // K
  double c_v;                      // J/K
  double c_v_over_kB;
  double internal_energy_thermal;  // J
  std::int64_t shells_used;
  bool converged;
  spectrum::GravityTheory theory;
};

/// c_V = k_B sum_s r3(s) f(eps_s / k_B T) over ascending shells s >= 1.
/// Converged once 5 consecutive shells each add at most rel_tol of the running
/// totals of c_V and of the thermal energy. Throws InvalidParameters for
/// T <= 0 or rel_tol outside (0, 1), DynamicalInstability from the spectrum,
/// NoConvergence when the shell budget is exhausted.
ThermoResult heat_capacity(const spectrum::CouplingSet& couplings, spectrum::GravityTheory theory,
                           double temperature, const ThermoOptions& options = {});
ThermoResult heat_capacity(const units::GasParameters& params, spectrum::GravityTheory theory,
                           double temperature, const ThermoOptions& options = {});

struct InternalEnergy {
  double thermal;      // sum eps <n_B>, J
  double mu_n;         // mu N, reported separately, J
  double temperature;  // K
  std::int64_t shells_used;
  bool converged;
  /// Cutoff-dependent ground-state partial sum, present only on request.
  std::optional<spectrum::GroundStateEnergy> ground_state;
};

InternalEnergy internal_energy(const spectrum::CouplingSet& couplings, spectrum::GravityTheory theory,
                               double temperature, const ThermoOptions& options = {},
                               std::optional<std::int64_t> ground_state_cutoff = std::nullopt);
InternalEnergy internal_energy(const units::GasParameters& params, spectrum::GravityTheory theory,
                               double temperature, const ThermoOptions& options = {},
                               std::optional<std::int64_t> ground_state_cutoff = std::nullopt);

struct Depletion {
  double n_t;  // atoms outside the condensate
  std::int64_t shell_cutoff;
  double temperature;
};

/// N_T = sum_{1 <= s <= cutoff} r3(s) [v^2 + (u^2 + v^2) / (e^x - 1)].
/// temperature == 0 drops the thermal term.
Depletion depletion(const spectrum::CouplingSet& couplings, double temperature, spectrum::GravityTheory theory,
                    std::int64_t shell_cutoff);
Depletion depletion(const units::GasParameters& params, double temperature, spectrum::GravityTheory theory,
                    std::int64_t shell_cutoff);

}  // namespace qgbec::thermo
