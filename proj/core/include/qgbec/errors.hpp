#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qgbec {

enum class ErrorKind {
  InvalidParameters,
  UnknownSpecies,
  NonFinite,
  ZeroMode,
  NoConvergence,
  SingularityHandling,
  DegenerateRegime,
  DynamicalInstability,
  NoBracket,
};

/// Stable identifier used in machine-readable error output.
std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. Carries a kind so callers
/// (notably the CLI and the scan driver) can classify failures without
/// catching each subtype.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by bad input rather than by the physics.
  bool is_usage_error() const noexcept {
    return kind_ == ErrorKind::InvalidParameters || kind_ == ErrorKind::UnknownSpecies;
  }

 private:
  ErrorKind kind_;
};

class DynamicalInstability : public Error {
 public:
  DynamicalInstability(long long shell, double radicand, const std::string& what)
      : Error(ErrorKind::DynamicalInstability, what), shell_(shell), radicand_(radicand) {}

  /// Squared lattice norm n^2 of the offending mode.
  long long shell() const noexcept { return shell_; }
  double radicand() const noexcept { return radicand_; }

 private:
  long long shell_;
  double radicand_;
};

}  // namespace qgbec
