#include "qgbec/experiment.hpp"

#include <cmath>
#include <numbers>

#include "qgbec/parallel.hpp"

namespace qgbec::experiment {

namespace {

using spectrum::CouplingSet;
using spectrum::GravityTheory;
using units::kConstants;

double percent(double classical, double quantum) {
  return 100.0 * std::abs(quantum - classical) / classical;
}

}  // namespace

DeviationReport energy_deviation(const CouplingSet& couplings, cube::ModeIndex mode) {
  const double classical = spectrum::dispersion(couplings, GravityTheory::Classical, mode).epsilon;
  const double quantum = spectrum::dispersion(couplings, GravityTheory::Quantum, mode).epsilon;
  return {Observable::Energy, mode, std::nullopt, classical, quantum, percent(classical, quantum)};
}

DeviationReport energy_deviation(const units::GasParameters& params, cube::ModeIndex mode) {
  return energy_deviation(spectrum::build_couplings(params), mode);
}

DeviationReport heatcap_deviation(const CouplingSet& couplings, double temperature,
                                  const thermo::ThermoOptions& options) {
  const auto classical = thermo::heat_capacity(couplings, GravityTheory::Classical, temperature, options);
  const auto quantum = thermo::heat_capacity(couplings, GravityTheory::Quantum, temperature, options);
  double deviation = 0.0;
  if (classical.c_v_over_kB > 0.0) {
    deviation = percent(classical.c_v_over_kB, quantum.c_v_over_kB);
  } else if (quantum.c_v_over_kB > 0.0) {
    throw Error(ErrorKind::NonFinite, "heatcap_deviation: classical heat capacity vanishes, quantum does not");
  }
  return {Observable::HeatCapacity,  std::nullopt,        temperature,          classical.c_v_over_kB,
          quantum.c_v_over_kB,       deviation,           classical.shells_used, quantum.shells_used};
}

DeviationReport heatcap_deviation(const units::GasParameters& params, double temperature,
                                  const thermo::ThermoOptions& options) {
  return heatcap_deviation(spectrum::build_couplings(params), temperature, options);
}

NlThresholdReport nl_threshold(const units::Species& species, std::int64_t n_k2, double deviation_percent) {
  species.validate();
  if (n_k2 < 1) throw Error(ErrorKind::InvalidParameters, "nl_threshold: n_k2 must be >= 1");
  if (!(deviation_percent > 0.0) || !std::isfinite(deviation_percent)) {
    throw Error(ErrorKind::InvalidParameters, "nl_threshold: deviation_percent must be positive");
  }
  const double hbar = kConstants.hbar;
  const double m = species.mass_kg;
  const double base = std::numbers::pi * std::numbers::pi * hbar * hbar * static_cast<double>(n_k2) /
                      (2380.0 * kConstants.G * m * m * m);
  NlThresholdReport report{(deviation_percent / 0.1) * base, n_k2, deviation_percent, species.name,
                           std::nullopt, std::nullopt};
  if (species.name == "Yb-174" && n_k2 == 1 && deviation_percent == 0.1) {
    report.quoted_value = kQuotedYbThreshold;
    report.quoted_consistent = std::abs(kQuotedYbThreshold - report.nl) <= 0.05 * report.nl;
  }
  return report;
}

ReconcileResult reconcile_cv_target(const units::GasParameters& params, double temperature,
                                    double cv_target_over_kB, const ReconcileOptions& options) {
  if (!(options.rel_tol > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorKind::InvalidParameters, "reconcile_cv_target: invalid tolerance or iteration cap");
  }
  if (!std::isfinite(cv_target_over_kB)) {
    throw Error(ErrorKind::InvalidParameters, "reconcile_cv_target: target must be finite");
  }
  const CouplingSet base = spectrum::build_couplings(params.with_g_em(0.0));
  auto cv = [&](double g) {
    return thermo::heat_capacity(base.with_g_em(g), GravityTheory::Classical, temperature, options.thermo)
        .c_v_over_kB;
  };

  const double free_cv = cv(0.0);
  if (!(cv_target_over_kB > 0.0 && cv_target_over_kB < free_cv)) {
    throw Error(ErrorKind::NoBracket, "reconcile_cv_target: target " + std::to_string(cv_target_over_kB) +
                                          " outside (0, " + std::to_string(free_cv) + ")");
  }

  // Interaction scale where n g_em matches the lowest kinetic energy.
  const double scale = spectrum::free_energy(base, 1) / base.density();
  double lo = scale * 1e-6;
  double hi = scale;
  for (int i = 0; cv(lo) <= cv_target_over_kB; ++i) {
    if (i == 40) throw Error(ErrorKind::NoBracket, "reconcile_cv_target: no lower bracket");
    lo *= 1e-3;
  }
  for (int i = 0; cv(hi) >= cv_target_over_kB; ++i) {
    if (i == 100) throw Error(ErrorKind::NoBracket, "reconcile_cv_target: no upper bracket");
    hi *= 10.0;
  }

  int iterations = 0;
  while (hi / lo - 1.0 > options.rel_tol) {
    if (++iterations > options.max_iterations) {
      throw Error(ErrorKind::NoConvergence, "reconcile_cv_target: bisection iteration cap reached");
    }
    const double mid = std::sqrt(lo * hi);
    (cv(mid) > cv_target_over_kB ? lo : hi) = mid;
  }
  const double g = std::sqrt(lo * hi);
  const CouplingSet fitted = base.with_g_em(g);
  const auto dev = heatcap_deviation(fitted, temperature, options.thermo);
  return {g, dev.classical, dev.quantum, dev.rel_deviation_percent, fitted.regime(), iterations};
}

bool ValidityReport::all_passed() const {
  for (const auto& f : flags) {
    if (!f.passed) return false;
  }
  return true;
}

ValidityReport validity_report(const units::GasParameters& params) {
  const auto& sp = params.species();
  const double n = params.density();
  const double a = std::abs(sp.scattering_length_m);
  const double total_mass = params.atom_count() * sp.mass_kg;
  const double gravitational_radius = kConstants.G * total_mass / (kConstants.c * kConstants.c);

  ValidityReport r{};
  r.diluteness = n * a * a * a;
  r.relativistic_radius = 1e9 * gravitational_radius;
  r.schwarzschild_ratio = params.box_length() / gravitational_radius;
  if (sp.three_body_rate > 0.0) r.three_body_half_life = 3.0 / (2.0 * sp.three_body_rate * n * n);
  r.estimated_velocity = kConstants.hbar * std::cbrt(n) / sp.mass_kg;
  r.flags = {
      {"dilute", r.diluteness < 1e-2},
      {"non_relativistic_size", params.box_length() > r.relativistic_radius},
      {"non_relativistic_velocity", r.estimated_velocity < 1e-3 * kConstants.c},
  };
  return r;
}

std::vector<double> geometric_range(double start, double stop, int points) {
  if (points < 1 || !(start > 0.0) || !(stop > 0.0) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw Error(ErrorKind::InvalidParameters, "geometric_range: need positive finite bounds and points >= 1");
  }
  if (points == 1) {
    if (start != stop) throw Error(ErrorKind::InvalidParameters, "geometric_range: one point needs start == stop");
    return {start};
  }
  std::vector<double> out(static_cast<std::size_t>(points));
  const double ratio = std::log(stop / start) / (points - 1);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = start * std::exp(ratio * i);
  out.front() = start;
  out.back() = stop;
  return out;
}

std::vector<ScanRow> scan(const units::Species& species, std::optional<double> g_em_override,
                          const ScanGrid& grid, const thermo::ThermoOptions& options) {
  std::vector<ScanRow> rows;
  rows.reserve(grid.atom_counts.size() * grid.box_lengths_m.size() * grid.temperatures_K.size());
  for (double n : grid.atom_counts) {
    for (double l : grid.box_lengths_m) {
      for (double t : grid.temperatures_K) rows.push_back({n, l, t, {}, {}, {}, {}});
    }
  }

  parallel_for_index(rows.size(), [&](std::size_t i) {
    ScanRow& row = rows[i];
    auto attempt = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        if (!row.error) row.error = ScanError{e.kind(), e.what()};
      }
    };
    std::optional<units::GasParameters> params;
    attempt([&] { params.emplace(species, row.atom_count, row.box_length_m, g_em_override); });
    if (!params) return;
    attempt([&] { row.validity = validity_report(*params); });
    std::optional<CouplingSet> couplings;
    attempt([&] { couplings.emplace(spectrum::build_couplings(*params)); });
    if (!couplings) return;
    attempt([&] { row.energy = energy_deviation(*couplings, cube::ModeIndex{1, 0, 0}); });
    attempt([&] { row.heatcap = heatcap_deviation(*couplings, row.temperature_K, options); });
  });
  return rows;
}

}  // namespace qgbec::experiment
