#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "qgbec/constants.hpp"
#include "qgbec/cube_potential.hpp"

namespace qgbec::spectrum {

enum class GravityTheory { Quantum, Classical };
enum class Regime { EMDominated, GravityDominated };

std::string_view to_string(GravityTheory theory) noexcept;
std::string_view to_string(Regime regime) noexcept;

/// Interaction strengths of one gas configuration. Immutable; the regime is
/// classified on construction and exact equality g_em == |g_g0| is rejected.
class CouplingSet {
 public:
  /// Throws DegenerateRegime when g_em == |g_g0|, InvalidParameters on
  /// non-finite input or g_g0 > 0 or gk_prefactor > 0.
  CouplingSet(double g_em, cube::GravityCoupling gravity, double density, double mass_kg, double box_length);

  double g_em() const noexcept { return g_em_; }
  double g_g0() const noexcept { return gravity_.g_g0; }
  double g_gk(std::int64_t n2) const { return gravity_.g_gk(n2); }
  const cube::GravityCoupling& gravity() const noexcept { return gravity_; }
  Regime regime() const noexcept { return regime_; }
  double density() const noexcept { return density_; }
  double mass() const noexcept { return mass_; }
  double box_length() const noexcept { return box_length_; }

  /// Copy with g_g0 and g_gk multiplied by the given factors (0 switches a
  /// term off). Used to compare against gravity-free reference spectra.
  CouplingSet with_gravity_scaled(double g0_factor, double gk_factor) const;
  CouplingSet with_g_em(double g_em) const;

 private:
  double g_em_;
  cube::GravityCoupling gravity_;
  double density_;
  double mass_;
  double box_length_;
  Regime regime_;
};

CouplingSet build_couplings(const units::GasParameters& params);

struct ChemicalPotential {
  double mu;  // J
  GravityTheory theory;
  Regime regime;
};

ChemicalPotential chemical_potential(const CouplingSet& couplings, GravityTheory theory);

struct DispersionPoint {
  cube::ModeIndex mode;
  double k;        // m^-1
  double epsilon;  // J
  GravityTheory theory;
};

/// Kinetic energy hbar^2 k^2 / 2m of shell n2.
double free_energy(const CouplingSet& couplings, std::int64_t n2);

/// Gapless quasiparticle energy of shell n2 (n^2 = nx^2 + ny^2 + nz^2).
/// Classical: hbar k sqrt(hbar^2 k^2/4m^2 + n g_em/m).
/// Quantum, EM dominated: hbar k sqrt(hbar^2 k^2/4m^2 + n g_em/m + n g_gk/m).
/// Quantum, gravity dominated:
///   sqrt((hbar^2k^2/2m - 2n(g_em + g_g0)) (hbar^2k^2/2m - 2n(g_g0 - g_gk))).
/// Throws DynamicalInstability when a radicand is negative.
double shell_energy(const CouplingSet& couplings, GravityTheory theory, std::int64_t n2);

/// Radicand under the square root of shell_energy, in J^2 (negative means
/// unstable). Never throws for n2 >= 1.
double shell_radicand(const CouplingSet& couplings, GravityTheory theory, std::int64_t n2);

DispersionPoint dispersion(const CouplingSet& couplings, GravityTheory theory, cube::ModeIndex mode);
DispersionPoint dispersion(const units::GasParameters& params, GravityTheory theory, cube::ModeIndex mode);

/// Energy before the gapless condition is imposed, for an arbitrary mu:
/// sqrt((hbar^2k^2/2m - mu + n(2g_em + g_g0 + g_gk))^2 - (n(g_em + g_gk))^2),
/// with the g_gk terms absent for Classical. Throws DynamicalInstability.
double pre_gapless_energy(const CouplingSet& couplings, GravityTheory theory, double mu, std::int64_t n2);

struct BogolyubovCoefficients {
  double u;
  double v;
  cube::ModeIndex mode;
};

struct ShellCoefficients {
  double u2;  // u^2
  double v2;  // v^2 = u^2 - 1
};

/// u^2 and v^2 of shell n2 with the theory's chemical potential. v^2 is formed
/// as B^2 / (2 eps (A + eps)) so that u^2 - v^2 = 1 without cancellation.
ShellCoefficients shell_coefficients(const CouplingSet& couplings, GravityTheory theory, std::int64_t n2);

BogolyubovCoefficients bogolyubov_coefficients(const CouplingSet& couplings, GravityTheory theory,
                                               cube::ModeIndex mode);
BogolyubovCoefficients bogolyubov_coefficients(const units::GasParameters& params, GravityTheory theory,
                                               cube::ModeIndex mode);

struct GroundStateEnergy {
  double value;  // J
  std::int64_t shell_cutoff;
  GravityTheory theory;
};

/// Partial sum of the ground-state energy over modes with n^2 <= shell_cutoff.
/// The full sum diverges; this is a cutoff-dependent diagnostic. For the
/// classical theory the n_T N_T g_g0 term uses the zero-temperature depletion
/// within the same cutoff.
GroundStateEnergy ground_state_energy(const CouplingSet& couplings, GravityTheory theory,
                                      std::int64_t shell_cutoff);
GroundStateEnergy ground_state_energy(const units::GasParameters& params, GravityTheory theory,
                                      std::int64_t shell_cutoff);

enum class NgbType { TypeA, TypeB, Indeterminate };
std::string_view to_string(NgbType type) noexcept;

struct NgbClassification {
  NgbType type;
  double slope;  // d log eps / d log k over the probe shells
};

/// Least-squares slope of log eps against log k over shells n^2 in {1,2,3,4}.
/// [0.9, 1.1] is TypeA (linear), [1.9, 2.1] TypeB (quadratic).
NgbClassification classify_ngb(const CouplingSet& couplings, GravityTheory theory);
NgbClassification classify_ngb(const units::GasParameters& params, GravityTheory theory);

}  // namespace qgbec::spectrum
