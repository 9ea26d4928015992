#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qgbec/constants.hpp"

#ifndef QGBEC_FIXTURE_DIR
#error "QGBEC_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace qgbec::test {

inline nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(std::string(QGBEC_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return nlohmann::json::parse(in);
}

inline double rel_diff(double a, double b) {
  return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

inline const units::Species& ytterbium() { return units::lookup_species("Yb-174"); }

inline units::GasParameters yb_gas(double n_atoms, double l = 0.01,
                                   std::optional<double> g_em = std::nullopt) {
  return units::GasParameters(ytterbium(), n_atoms, l, g_em);
}

}  // namespace qgbec::test
