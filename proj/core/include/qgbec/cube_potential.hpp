#pragma once

#include <complex>
#include <compare>
#include <cstdint>

namespace qgbec::cube {

/// Integer lattice vector labelling a plane wave in the periodic box,
/// k = 2 pi (nx, ny, nz) / L.
struct ModeIndex {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  constexpr std::int64_t n2() const noexcept {
    return std::int64_t{nx} * nx + std::int64_t{ny} * ny + std::int64_t{nz} * nz;
  }
  constexpr bool is_zero() const noexcept { return nx == 0 && ny == 0 && nz == 0; }
  /// |k| in m^-1 for a box of side box_length.
  double wavenumber(double box_length) const;

  auto operator<=>(const ModeIndex&) const = default;
};

/// Marker for the k = 0 Fourier component, which is not an excitation mode.
struct ZeroModeTag {};
inline constexpr ZeroModeTag zero_mode{};

/// (pi/2) ((12/pi) asinh(1/sqrt 2) - 1) ~ 2.38008: minus the potential of a
/// uniform unit cube at its centre, in units of G m^2 L^2.
double v0_coefficient();

/// Zero-mode coefficient of -G m^2/|r| over the cube, closed form:
/// -(pi G m^2 L^2 / 2)((12/pi) asinh(1/sqrt 2) - 1). This is also g_G0.
double v0_closed_form(double mass_kg, double box_length);

/// -4 pi G m^2 / k^2 = -G m^2 L^2 / (pi n^2). Throws ZeroMode.
double gk_approx(ModeIndex mode, double mass_kg, double box_length);
/// Same, by squared lattice norm. Throws ZeroMode for n2 == 0.
double gk_approx_shell(std::int64_t n2, double mass_kg, double box_length);

struct Oracle1dOptions {
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

/// Dimensionless I(n) = 2 pi \int_0^inf v e^{-pi^2 v^2 n^2} prod_j Re erf(1/(2v) + i pi n_j v) dv,
/// so that the exact Fourier coefficient is -G m^2 L^2 I(n). Accepts the zero
/// vector. No approximation of the erf product is made; the half line is
/// mapped onto [0, 1).
double fourier_integral_1d(ModeIndex mode, const Oracle1dOptions& options = {});

/// Exact coefficient from fourier_integral_1d. Throws ZeroMode, NoConvergence.
double gk_oracle_1d(ModeIndex mode, double mass_kg, double box_length, double rel_tol);
double gk_oracle_1d(ZeroModeTag, double mass_kg, double box_length, double rel_tol);

struct Oracle3dOptions {
  int grid = 128;   // cells per edge
  int order = 2;    // Gauss-Legendre points per cell per axis
};

/// Dimensionless (1/L^2) \int_cube e^{-i k.r} / |r| d^3r by a composite
/// tensor-product Gauss-Legendre rule. The rule never samples r = 0; a
/// configuration that would (odd grid with odd order) throws
/// SingularityHandling. Slabs are summed in parallel and reduced in fixed
/// order, so the result does not depend on the worker count.
std::complex<double> fourier_integral_3d(ModeIndex mode, const Oracle3dOptions& options);

/// Real coefficient -G m^2 L^2 * fourier_integral_3d. Throws ZeroMode for a
/// zero ModeIndex (use the tag), InvalidParameters for grid < 16 and
/// NonFinite when the imaginary residue exceeds 1e-8 of the real part.
double gk_oracle_3d(ModeIndex mode, double mass_kg, double box_length, const Oracle3dOptions& options = {});
double gk_oracle_3d(ZeroModeTag, double mass_kg, double box_length, const Oracle3dOptions& options = {});

/// g_G0 and the mode-dependent g_Gk in the form used by the spectra.
struct GravityCoupling {
  double g_g0 = 0.0;          // J m^3
  double gk_prefactor = 0.0;  // J m^3; g_Gk = gk_prefactor / n^2

  static GravityCoupling for_box(double mass_kg, double box_length);
  double g_gk(std::int64_t n2) const;
  double g_gk(ModeIndex mode) const { return g_gk(mode.n2()); }
};

}  // namespace qgbec::cube
