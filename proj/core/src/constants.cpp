#include "qgbec/constants.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qgbec/errors.hpp"

namespace qgbec {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::UnknownSpecies: return "UnknownSpecies";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ZeroMode: return "ZeroMode";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularityHandling: return "SingularityHandling";
    case ErrorKind::DegenerateRegime: return "DegenerateRegime";
    case ErrorKind::DynamicalInstability: return "DynamicalInstability";
    case ErrorKind::NoBracket: return "NoBracket";
  }
  return "Unknown";
}

}  // namespace qgbec

namespace qgbec::units {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidParameters, what);
}

Species species_from_json(const nlohmann::json& j) {
  return make_species(j.at("name").get<std::string>(), j.at("mass_u").get<double>(),
                      j.at("a_s_nm").get<double>(), j.value("three_body_rate_m6_per_s", 0.0));
}

}  // namespace

void Species::validate() const {
  require(!name.empty(), "species name is empty");
  require(std::isfinite(mass_kg) && mass_kg > 0.0, "species mass must be positive: " + name);
  require(std::isfinite(scattering_length_m), "scattering length must be finite: " + name);
  require(std::isfinite(three_body_rate) && three_body_rate >= 0.0,
          "three-body rate must be non-negative: " + name);
}

Species make_species(std::string name, double mass_u, double a_s_nm, double three_body_rate) {
  Species s{std::move(name), mass_u * kConstants.u, a_s_nm * kNanometre, three_body_rate};
  s.validate();
  return s;
}

SpeciesRegistry::SpeciesRegistry() {
  // a_s of Yb-174 is about 105 Bohr radii.
  add(make_species("Yb-174", 174.0, 5.55, 1e-41));
  add(make_species("H-1", 1.008, 0.0648, 0.0));
}

const Species& SpeciesRegistry::lookup(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorKind::UnknownSpecies, "unknown species '" + std::string(name) + "'");
  }
  return it->second;
}

bool SpeciesRegistry::contains(std::string_view name) const {
  return entries_.find(name) != entries_.end();
}

void SpeciesRegistry::add(Species species) {
  species.validate();
  auto key = species.name;
  entries_.insert_or_assign(std::move(key), std::move(species));
}

std::vector<std::string> SpeciesRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

void SpeciesRegistry::load_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    const auto& list = doc.is_array() ? doc : doc.at("species");
    std::vector<Species> parsed;
    for (const auto& entry : list) parsed.push_back(species_from_json(entry));
    for (auto& s : parsed) add(std::move(s));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidParameters, std::string("species file: ") + e.what());
  }
}

void SpeciesRegistry::load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidParameters, "cannot open species file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  load_json_text(buf.str());
}

const Species& lookup_species(std::string_view name) {
  static const SpeciesRegistry registry;
  return registry.lookup(name);
}

GasParameters::GasParameters(Species species, double atom_count, double box_length_m,
                             std::optional<double> g_em_override)
    : species_(std::move(species)),
      atom_count_(atom_count),
      box_length_(box_length_m),
      g_em_override_(g_em_override) {
  species_.validate();
  require(std::isfinite(atom_count_) && atom_count_ >= 1.0, "atom count N must be >= 1");
  require(std::isfinite(box_length_) && box_length_ > 0.0, "box length L must be > 0");
  require(!g_em_override_ || std::isfinite(*g_em_override_), "g_em override must be finite");
}

GasParameters GasParameters::with_atom_count(double n) const {
  return GasParameters(species_, n, box_length_, g_em_override_);
}

GasParameters GasParameters::with_box_length(double l) const {
  return GasParameters(species_, atom_count_, l, g_em_override_);
}

GasParameters GasParameters::with_g_em(std::optional<double> g_em) const {
  return GasParameters(species_, atom_count_, box_length_, g_em);
}

double contact_coupling(const Species& species) {
  const double hbar = kConstants.hbar;
  return 4.0 * std::numbers::pi * hbar * hbar * species.scattering_length_m / species.mass_kg;
}

DerivedQuantities derived_quantities(const GasParameters& params) {
  return {params.volume(), params.density(),
          params.g_em_override().value_or(contact_coupling(params.species()))};
}

double box_energy_scale(const GasParameters& params) {
  const double hbar = kConstants.hbar;
  const double l = params.box_length();
  return hbar * hbar / (2.0 * params.species().mass_kg * l * l);
}

}  // namespace qgbec::units
