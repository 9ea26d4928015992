#include "qgbec/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "qgbec/errors.hpp"
#include "qgbec/quadrature.hpp"
#include "qgbec/thermo.hpp"

namespace qgbec::spectrum {

namespace {

using units::kConstants;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double wavenumber(const CouplingSet& c, std::int64_t n2) {
  return 2.0 * std::numbers::pi * std::sqrt(static_cast<double>(n2)) / c.box_length();
}

void require_shell(std::int64_t n2) {
  if (n2 < 1) throw Error(ErrorKind::ZeroMode, "dispersion: zero mode is not an excitation");
}

// mu = multiplier * n (g_em + g_g0).
double mu_multiplier(const CouplingSet& c, GravityTheory theory) {
  return theory == GravityTheory::Quantum && c.regime() == Regime::GravityDominated ? 3.0 : 1.0;
}

[[noreturn]] void unstable(GravityTheory theory, std::int64_t n2, double radicand) {
  throw DynamicalInstability(n2, radicand,
                             std::string("dynamical instability (") + std::string(to_string(theory)) +
                                 "): negative radicand " + sci(radicand) +
                                 " at shell n^2 = " + std::to_string(n2));
}

}  // namespace

std::string_view to_string(GravityTheory theory) noexcept {
  return theory == GravityTheory::Quantum ? "quantum" : "classical";
}

std::string_view to_string(Regime regime) noexcept {
  return regime == Regime::EMDominated ? "EMDominated" : "GravityDominated";
}

std::string_view to_string(NgbType type) noexcept {
  switch (type) {
    case NgbType::TypeA: return "TypeA";
    case NgbType::TypeB: return "TypeB";
    case NgbType::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

CouplingSet::CouplingSet(double g_em, cube::GravityCoupling gravity, double density, double mass_kg,
                         double box_length)
    : g_em_(g_em), gravity_(gravity), density_(density), mass_(mass_kg), box_length_(box_length) {
  const bool finite = std::isfinite(g_em) && std::isfinite(gravity.g_g0) && std::isfinite(gravity.gk_prefactor) &&
                      std::isfinite(density) && std::isfinite(mass_kg) && std::isfinite(box_length);
  if (!finite || density <= 0.0 || mass_kg <= 0.0 || box_length <= 0.0) {
    throw Error(ErrorKind::InvalidParameters, "CouplingSet: invalid or non-finite input");
  }
  if (gravity.g_g0 > 0.0 || gravity.gk_prefactor > 0.0) {
    throw Error(ErrorKind::InvalidParameters, "CouplingSet: gravitational couplings must be attractive");
  }
  const double g0 = std::abs(gravity.g_g0);
  if (g_em == g0) {
    throw Error(ErrorKind::DegenerateRegime,
                "g_em equals |g_G0| exactly; neither regime applies (" + sci(g_em) + ")");
  }
  regime_ = g_em > g0 ? Regime::EMDominated : Regime::GravityDominated;
}

CouplingSet CouplingSet::with_gravity_scaled(double g0_factor, double gk_factor) const {
  return CouplingSet(g_em_, {gravity_.g_g0 * g0_factor, gravity_.gk_prefactor * gk_factor}, density_, mass_,
                     box_length_);
}

CouplingSet CouplingSet::with_g_em(double g_em) const {
  return CouplingSet(g_em, gravity_, density_, mass_, box_length_);
}

CouplingSet build_couplings(const units::GasParameters& params) {
  const auto derived = units::derived_quantities(params);
  const double m = params.species().mass_kg;
  return CouplingSet(derived.g_em, cube::GravityCoupling::for_box(m, params.box_length()), derived.density, m,
                     params.box_length());
}

ChemicalPotential chemical_potential(const CouplingSet& c, GravityTheory theory) {
  return {mu_multiplier(c, theory) * c.density() * (c.g_em() + c.g_g0()), theory, c.regime()};
}

double free_energy(const CouplingSet& c, std::int64_t n2) {
  require_shell(n2);
  const double hbar = kConstants.hbar;
  const double k = wavenumber(c, n2);
  return hbar * hbar * k * k / (2.0 * c.mass());
}

double shell_radicand(const CouplingSet& c, GravityTheory theory, std::int64_t n2) {
  require_shell(n2);
  const double hbar = kConstants.hbar;
  const double m = c.mass();
  const double n = c.density();
  const double k = wavenumber(c, n2);
  if (theory == GravityTheory::Classical) {
    const double hk = hbar * k;
    return hk * hk * (hbar * hbar * k * k / (4.0 * m * m) + n * c.g_em() / m);
  }
  const double gk = c.g_gk(n2);
  if (c.regime() == Regime::EMDominated) {
    const double hk = hbar * k;
    return hk * hk * (hbar * hbar * k * k / (4.0 * m * m) + n * c.g_em() / m + n * gk / m);
  }
  const double kin = hbar * hbar * k * k / (2.0 * m);
  return (kin - 2.0 * n * (c.g_em() + c.g_g0())) * (kin - 2.0 * n * (c.g_g0() - gk));
}

double shell_energy(const CouplingSet& c, GravityTheory theory, std::int64_t n2) {
  require_shell(n2);
  const double hbar = kConstants.hbar;
  const double m = c.mass();
  const double n = c.density();
  const double k = wavenumber(c, n2);

  if (theory == GravityTheory::Classical) {
    const double inner = hbar * hbar * k * k / (4.0 * m * m) + n * c.g_em() / m;
    if (inner < 0.0) unstable(theory, n2, shell_radicand(c, theory, n2));
    return hbar * k * std::sqrt(inner);
  }
  const double gk = c.g_gk(n2);
  if (c.regime() == Regime::EMDominated) {
    const double inner = hbar * hbar * k * k / (4.0 * m * m) + n * c.g_em() / m + n * gk / m;
    if (inner < 0.0) unstable(theory, n2, shell_radicand(c, theory, n2));
    return hbar * k * std::sqrt(inner);
  }
  const double kin = hbar * hbar * k * k / (2.0 * m);
  const double radicand = (kin - 2.0 * n * (c.g_em() + c.g_g0())) * (kin - 2.0 * n * (c.g_g0() - gk));
  if (radicand < 0.0) unstable(theory, n2, radicand);
  return std::sqrt(radicand);
}

DispersionPoint dispersion(const CouplingSet& c, GravityTheory theory, cube::ModeIndex mode) {
  const auto n2 = mode.n2();
  return {mode, wavenumber(c, std::max<std::int64_t>(n2, 1)) * (n2 == 0 ? 0.0 : 1.0), shell_energy(c, theory, n2),
          theory};
}

DispersionPoint dispersion(const units::GasParameters& params, GravityTheory theory, cube::ModeIndex mode) {
  return dispersion(build_couplings(params), theory, mode);
}

double pre_gapless_energy(const CouplingSet& c, GravityTheory theory, double mu, std::int64_t n2) {
  const double kin = free_energy(c, n2);
  const double n = c.density();
  const double gk = theory == GravityTheory::Quantum ? c.g_gk(n2) : 0.0;
  const double a = kin - mu + n * (2.0 * c.g_em() + c.g_g0() + gk);
  const double b = n * (c.g_em() + gk);
  const double radicand = (a - b) * (a + b);
  if (radicand < 0.0) unstable(theory, n2, radicand);
  return std::sqrt(radicand);
}

ShellCoefficients shell_coefficients(const CouplingSet& c, GravityTheory theory, std::int64_t n2) {
  const double eps = shell_energy(c, theory, n2);
  const double kin = free_energy(c, n2);
  const double n = c.density();
  const double gk = theory == GravityTheory::Quantum ? c.g_gk(n2) : 0.0;
  // A = K - mu + n(2 g_em + g_gk + g_g0) with mu = m_mu n (g_em + g_g0),
  // grouped so the n g_em pieces cancel symbolically rather than in floating point.
  const double excess = (mu_multiplier(c, theory) - 1.0) * n * (c.g_em() + c.g_g0());
  const double a = kin + n * (c.g_em() + gk) - excess;
  const double b = n * (c.g_em() + gk);
  // Rounding can leave u2 an ulp below 1 when the mixing vanishes.
  const double u2 = std::max(a / (2.0 * eps) + 0.5, 1.0);
  const double v2 = b * b / (2.0 * eps * (a + eps));
  return {u2, v2};
}

BogolyubovCoefficients bogolyubov_coefficients(const CouplingSet& c, GravityTheory theory, cube::ModeIndex mode) {
  const auto s = shell_coefficients(c, theory, mode.n2());
  return {std::sqrt(s.u2), std::sqrt(s.v2), mode};
}

BogolyubovCoefficients bogolyubov_coefficients(const units::GasParameters& params, GravityTheory theory,
                                               cube::ModeIndex mode) {
  return bogolyubov_coefficients(build_couplings(params), theory, mode);
}

GroundStateEnergy ground_state_energy(const CouplingSet& c, GravityTheory theory, std::int64_t shell_cutoff) {
  if (shell_cutoff < 1) throw Error(ErrorKind::InvalidParameters, "ground_state_energy: shell_cutoff must be >= 1");
  const double n = c.density();
  const double volume = c.box_length() * c.box_length() * c.box_length();
  const double atoms = n * volume;
  const double mu = chemical_potential(c, theory).mu;

  numeric::CompensatedSum base;    // sum of [mu - K - 2 n g_em - n g_g0]
  numeric::CompensatedSum extra;   // theory-specific mode sum
  numeric::CompensatedSum depleted;
  for (std::int64_t s = 1; s <= shell_cutoff; ++s) {
    const double r = static_cast<double>(thermo::shell_multiplicity(s));
    if (r == 0.0) continue;
    const double kin = free_energy(c, s);
    base.add(r * (mu - kin - 2.0 * n * c.g_em() - n * c.g_g0()));
    const double eps = shell_energy(c, theory, s);
    if (theory == GravityTheory::Quantum) {
      extra.add(r * (eps - n * c.g_gk(s)));
    } else {
      extra.add(r * eps);
      depleted.add(r * shell_coefficients(c, theory, s).v2);
    }
  }
  double e0 = 0.5 * n * atoms * c.g_em() + 0.5 * base.value();
  if (theory == GravityTheory::Quantum) {
    e0 += 0.5 * n * atoms * c.g_g0() + 0.5 * extra.value();
  } else {
    const double n_t = depleted.value();
    e0 += (n_t / volume) * n_t * c.g_g0() + 0.5 * extra.value();
  }
  return {e0, shell_cutoff, theory};
}

GroundStateEnergy ground_state_energy(const units::GasParameters& params, GravityTheory theory,
                                      std::int64_t shell_cutoff) {
  return ground_state_energy(build_couplings(params), theory, shell_cutoff);
}

NgbClassification classify_ngb(const CouplingSet& c, GravityTheory theory) {
  constexpr std::array<std::int64_t, 4> shells = {1, 2, 3, 4};
  double sx = 0.0;
  double sy = 0.0;
  std::array<double, 4> lx{};
  std::array<double, 4> ly{};
  for (std::size_t i = 0; i < shells.size(); ++i) {
    lx[i] = std::log(wavenumber(c, shells[i]));
    ly[i] = std::log(shell_energy(c, theory, shells[i]));
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / shells.size();
  const double my = sy / shells.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  NgbType type = NgbType::Indeterminate;
  if (slope >= 0.9 && slope <= 1.1) type = NgbType::TypeA;
  if (slope >= 1.9 && slope <= 2.1) type = NgbType::TypeB;
  return {type, slope};
}

NgbClassification classify_ngb(const units::GasParameters& params, GravityTheory theory) {
  return classify_ngb(build_couplings(params), theory);
}

}  // namespace qgbec::spectrum
