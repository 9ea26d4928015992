#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qgbec::units {

/// CODATA 2018 recommended values, SI.
struct PhysicalConstants {
  double hbar;   // J s
  double G;      // m^3 kg^-1 s^-2
  double k_B;    // J K^-1
  double c;      // m s^-1
  double u;      // kg
};

inline constexpr PhysicalConstants kConstants{
    .hbar = 1.054571817e-34,
    .G = 6.67430e-11,
    .k_B = 1.380649e-23,
    .c = 299792458.0,
    .u = 1.66053906660e-27,
};

inline constexpr std::string_view kConstantsVersion = "CODATA 2018";

inline constexpr double kNanometre = 1e-9;

struct Species {
  std::string name;
  double mass_kg = 0.0;
  double scattering_length_m = 0.0;
  /// Three-body loss coefficient K3 in dn/dt = -K3 n^3 (m^6 s^-1).
  double three_body_rate = 0.0;

  double mass_u() const { return mass_kg / kConstants.u; }
  double scattering_length_nm() const { return scattering_length_m / kNanometre; }

  /// Throws InvalidParameters when mass <= 0, the rate is negative or a field is non-finite.
  void validate() const;

  bool operator==(const Species&) const = default;
};

Species make_species(std::string name, double mass_u, double a_s_nm, double three_body_rate);

/// Registry of named species. The default-constructed registry holds the
/// compiled-in entries (Yb-174, H-1).
class SpeciesRegistry {
 public:
  SpeciesRegistry();

  /// Throws UnknownSpecies.
  const Species& lookup(std::string_view name) const;
  bool contains(std::string_view name) const;
  void add(Species species);
  std::vector<std::string> names() const;

  /// Loads entries from a JSON file: either an array of objects or an object
  /// with a "species" array. Each entry has name, mass_u, a_s_nm and
  /// three_body_rate_m6_per_s. Entries replace built-ins of the same name.
  void load_json_file(const std::filesystem::path& path);
  void load_json_text(std::string_view text);

 private:
  std::map<std::string, Species, std::less<>> entries_;
};

/// Looks up in the built-in registry.
const Species& lookup_species(std::string_view name);

class GasParameters {
 public:
  /// Throws InvalidParameters unless N >= 1, L > 0 and everything is finite.
  GasParameters(Species species, double atom_count, double box_length_m,
                std::optional<double> g_em_override = std::nullopt);

  const Species& species() const noexcept { return species_; }
  double atom_count() const noexcept { return atom_count_; }
  double box_length() const noexcept { return box_length_; }
  const std::optional<double>& g_em_override() const noexcept { return g_em_override_; }

  double volume() const noexcept { return box_length_ * box_length_ * box_length_; }
  double density() const noexcept { return atom_count_ / volume(); }

  GasParameters with_atom_count(double n) const;
  GasParameters with_box_length(double l) const;
  GasParameters with_g_em(std::optional<double> g_em) const;

  bool operator==(const GasParameters&) const = default;

 private:
  Species species_;
  double atom_count_;
  double box_length_;
  std::optional<double> g_em_override_;
};

struct DerivedQuantities {
  double volume;   // m^3
  double density;  // m^-3
  double g_em;     // J m^3
};

/// 4 pi hbar^2 a_s / m.
double contact_coupling(const Species& species);

DerivedQuantities derived_quantities(const GasParameters& params);

/// hbar^2 / (2 m L^2), the kinetic energy scale of the box. Reporting only.
double box_energy_scale(const GasParameters& params);

}  // namespace qgbec::units
