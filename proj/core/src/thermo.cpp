#include "qgbec/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "qgbec/errors.hpp"
#include "qgbec/quadrature.hpp"

namespace qgbec::thermo {

namespace {

using spectrum::CouplingSet;
using spectrum::GravityTheory;
using units::kConstants;

std::int64_t isqrt(std::int64_t s) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(s)));
  while (r * r > s) --r;
  while ((r + 1) * (r + 1) <= s) ++r;
  return r;
}

// r3 via r3(s) = sum_z r2(s - z^2), with r2 tabulated by direct enumeration.
std::vector<std::int64_t> build_r3(std::int64_t size) {
  std::vector<std::int64_t> r2(static_cast<std::size_t>(size), 0);
  const std::int64_t limit = size - 1;
  const std::int64_t xmax = isqrt(limit);
  for (std::int64_t x = -xmax; x <= xmax; ++x) {
    const std::int64_t rest = limit - x * x;
    const std::int64_t ymax = isqrt(rest);
    for (std::int64_t y = -ymax; y <= ymax; ++y) ++r2[static_cast<std::size_t>(x * x + y * y)];
  }
  std::vector<std::int64_t> r3(static_cast<std::size_t>(size), 0);
  for (std::int64_t s = 0; s < size; ++s) {
    std::int64_t count = r2[static_cast<std::size_t>(s)];
    for (std::int64_t z = 1; z * z <= s; ++z) count += 2 * r2[static_cast<std::size_t>(s - z * z)];
    r3[static_cast<std::size_t>(s)] = count;
  }
  return r3;
}

class ShellTable {
 public:
  ShellSnapshot covering(std::int64_t s_max) {
    std::lock_guard lock(mutex_);
    if (!table_ || static_cast<std::int64_t>(table_->size()) <= s_max) {
      const std::int64_t current = table_ ? static_cast<std::int64_t>(table_->size()) : 0;
      const std::int64_t size = std::max({s_max + 1, 2 * current, std::int64_t{1024}});
      table_ = std::make_shared<const std::vector<std::int64_t>>(build_r3(size));
    }
    return table_;
  }

 private:
  std::mutex mutex_;
  ShellSnapshot table_;
};

ShellTable& global_table() {
  static ShellTable table;
  return table;
}

void require_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::InvalidParameters, "temperature must be positive and finite");
  }
}

void require_options(const ThermoOptions& o) {
  if (!(o.rel_tol > 0.0 && o.rel_tol < 1.0)) {
    throw Error(ErrorKind::InvalidParameters, "rel_tol must lie in (0, 1)");
  }
  if (o.shell_budget < 1) throw Error(ErrorKind::InvalidParameters, "shell budget must be >= 1");
  if (o.fixed_cutoff && *o.fixed_cutoff < 1) {
    throw Error(ErrorKind::InvalidParameters, "fixed shell cutoff must be >= 1");
  }
}

// Bose occupation 1 / (e^x - 1); zero past the overflow guard.
double bose(double x) { return x > 745.0 ? 0.0 : 1.0 / std::expm1(x); }

struct ModeSums {
  double c_v_over_kB;
  double energy;
  std::int64_t shells;
  bool converged;
};

ModeSums mode_sums(const CouplingSet& c, GravityTheory theory, double temperature, const ThermoOptions& o) {
  constexpr int kQuietRun = 5;
  constexpr std::int64_t kChunk = 1024;
  const double kt = kConstants.k_B * temperature;
  const std::int64_t last = o.fixed_cutoff.value_or(o.shell_budget);

  numeric::CompensatedSum cv;
  numeric::CompensatedSum energy;
  int quiet = 0;
  ShellSnapshot table = global_table().covering(std::min(last, kChunk));
  for (std::int64_t s = 1; s <= last; ++s) {
    if (s >= static_cast<std::int64_t>(table->size())) table = global_table().covering(std::min(last, 2 * s));
    const auto r = static_cast<double>((*table)[static_cast<std::size_t>(s)]);
    double dc = 0.0;
    double de = 0.0;
    if (r != 0.0) {
      const double eps = spectrum::shell_energy(c, theory, s);
      const double x = eps / kt;
      dc = r * mode_term_x(x);
      de = r * eps * bose(x);
      cv.add(dc);
      energy.add(de);
    }
    if (o.fixed_cutoff) continue;
    const bool small = dc <= o.rel_tol * cv.value() && de <= o.rel_tol * energy.value();
    quiet = small ? quiet + 1 : 0;
    if (quiet >= kQuietRun) return {cv.value(), energy.value(), s, true};
  }
  if (!o.fixed_cutoff) {
    throw Error(ErrorKind::NoConvergence, "heat capacity did not converge within " +
                                              std::to_string(o.shell_budget) + " shells");
  }
  return {cv.value(), energy.value(), last, true};
}

}  // namespace

ShellSnapshot shell_table(std::int64_t s_max) {
  if (s_max < 0) throw Error(ErrorKind::InvalidParameters, "shell_table: negative bound");
  return global_table().covering(s_max);
}

std::int64_t shell_multiplicity(std::int64_t s) {
  if (s < 0) throw Error(ErrorKind::InvalidParameters, "shell_multiplicity: negative shell");
  return (*global_table().covering(s))[static_cast<std::size_t>(s)];
}

double mode_term_x(double x) {
  if (x < 1e-4) return 1.0 - x * x / 12.0;
  if (x > 745.0) return 0.0;
  const double d = -std::expm1(-x);  // 1 - e^{-x}
  return x * x * std::exp(-x) / (d * d);
}

double mode_term(double epsilon, double temperature) {
  return mode_term_x(epsilon / (kConstants.k_B * temperature));
}

ThermoResult heat_capacity(const CouplingSet& couplings, GravityTheory theory, double temperature,
                           const ThermoOptions& options) {
  require_temperature(temperature);
  require_options(options);
  const auto sums = mode_sums(couplings, theory, temperature, options);
  return {temperature,  kConstants.k_B * sums.c_v_over_kB, sums.c_v_over_kB, sums.energy, sums.shells,
          sums.converged, theory};
}

ThermoResult heat_capacity(const units::GasParameters& params, GravityTheory theory, double temperature,
                           const ThermoOptions& options) {
  return heat_capacity(spectrum::build_couplings(params), theory, temperature, options);
}

InternalEnergy internal_energy(const CouplingSet& couplings, GravityTheory theory, double temperature,
                               const ThermoOptions& options, std::optional<std::int64_t> ground_state_cutoff) {
  const auto r = heat_capacity(couplings, theory, temperature, options);
  const double atoms = couplings.density() * couplings.box_length() * couplings.box_length() *
                       couplings.box_length();
  InternalEnergy out{r.internal_energy_thermal,
                     spectrum::chemical_potential(couplings, theory).mu * atoms,
                     temperature,
                     r.shells_used,
                     r.converged,
                     std::nullopt};
  if (ground_state_cutoff) out.ground_state = spectrum::ground_state_energy(couplings, theory, *ground_state_cutoff);
  return out;
}

InternalEnergy internal_energy(const units::GasParameters& params, GravityTheory theory, double temperature,
                               const ThermoOptions& options, std::optional<std::int64_t> ground_state_cutoff) {
  return internal_energy(spectrum::build_couplings(params), theory, temperature, options, ground_state_cutoff);
}

Depletion depletion(const CouplingSet& couplings, double temperature, GravityTheory theory,
                    std::int64_t shell_cutoff) {
  if (shell_cutoff < 1) throw Error(ErrorKind::InvalidParameters, "depletion: shell_cutoff must be >= 1");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::InvalidParameters, "depletion: temperature must be finite and >= 0");
  }
  const auto table = global_table().covering(shell_cutoff);
  const double kt = kConstants.k_B * temperature;
  numeric::CompensatedSum sum;
  for (std::int64_t s = 1; s <= shell_cutoff; ++s) {
    const auto r = static_cast<double>((*table)[static_cast<std::size_t>(s)]);
    if (r == 0.0) continue;
    const auto uv = spectrum::shell_coefficients(couplings, theory, s);
    double occupation = uv.v2;
    if (temperature > 0.0) {
      occupation += (uv.u2 + uv.v2) * bose(spectrum::shell_energy(couplings, theory, s) / kt);
    }
    sum.add(r * occupation);
  }
  return {sum.value(), shell_cutoff, temperature};
}

Depletion depletion(const units::GasParameters& params, double temperature, GravityTheory theory,
                    std::int64_t shell_cutoff) {
  return depletion(spectrum::build_couplings(params), temperature, theory, shell_cutoff);
}

}  // namespace qgbec::thermo
