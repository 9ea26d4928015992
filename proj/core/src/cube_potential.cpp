#include "qgbec/cube_potential.hpp"

#include <array>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qgbec/constants.hpp"
#include "qgbec/errors.hpp"
#include "qgbec/parallel.hpp"
#include "qgbec/quadrature.hpp"
#include "qgbec/special.hpp"

namespace qgbec::cube {

namespace {

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

using std::numbers::pi;

void require_nonzero(ModeIndex mode, const char* who) {
  if (mode.is_zero()) {
    throw Error(ErrorKind::ZeroMode, std::string(who) + ": zero mode has no 1/k^2 form; use v0_closed_form");
  }
}

double gravity_scale(double mass_kg, double box_length) {
  return units::kConstants.G * mass_kg * mass_kg * box_length * box_length;
}

double check_tol(double rel_tol) {
  if (!(rel_tol > 1e-12 && rel_tol < 1e-2)) {
    throw Error(ErrorKind::InvalidParameters, "gk_oracle_1d: rel_tol must lie in (1e-12, 1e-2)");
  }
  return rel_tol;
}

}  // namespace

double ModeIndex::wavenumber(double box_length) const {
  return 2.0 * pi * std::sqrt(static_cast<double>(n2())) / box_length;
}

double v0_coefficient() {
  return 0.5 * pi * (12.0 / pi * std::asinh(1.0 / std::sqrt(2.0)) - 1.0);
}

double v0_closed_form(double mass_kg, double box_length) {
  return -v0_coefficient() * gravity_scale(mass_kg, box_length);
}

double gk_approx_shell(std::int64_t n2, double mass_kg, double box_length) {
  if (n2 <= 0) throw Error(ErrorKind::ZeroMode, "gk_approx: zero mode");
  return -gravity_scale(mass_kg, box_length) / (pi * static_cast<double>(n2));
}

double gk_approx(ModeIndex mode, double mass_kg, double box_length) {
  require_nonzero(mode, "gk_approx");
  return gk_approx_shell(mode.n2(), mass_kg, box_length);
}

double fourier_integral_1d(ModeIndex mode, const Oracle1dOptions& options) {
  const std::array<int, 3> n = {mode.nx, mode.ny, mode.nz};
  std::array<double, 3> phase{};
  for (int j = 0; j < 3; ++j) phase[j] = (n[j] % 2 == 0) ? 1.0 : -1.0;

  // v = t / (1 - t). With x = 1/(2v) and y_j = pi n_j v the product x y_j is
  // pi n_j / 2, so cos(2 x y_j) = (-1)^{n_j} and sin(2 x y_j) = 0 exactly.
  // The Gaussian e^{-pi^2 v^2 n^2} is absorbed into the scaled erf factors.
  auto integrand = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    const double v = t / one_minus;
    const double x = 0.5 * one_minus / t;
    double f = v;
    for (int j = 0; j < 3; ++j) {
      f *= special::scaled_re_erf_with_phase(x, pi * n[j] * v, phase[j], 0.0);
    }
    return f / (one_minus * one_minus);
  };
  const auto r = numeric::integrate_adaptive(integrand, 0.0, 1.0, options.rel_tol, 0.0,
                                             options.max_intervals);
  return 2.0 * pi * r.value;
}

double gk_oracle_1d(ModeIndex mode, double mass_kg, double box_length, double rel_tol) {
  require_nonzero(mode, "gk_oracle_1d");
  return -gravity_scale(mass_kg, box_length) *
         fourier_integral_1d(mode, {.rel_tol = check_tol(rel_tol)});
}

double gk_oracle_1d(ZeroModeTag, double mass_kg, double box_length, double rel_tol) {
  return -gravity_scale(mass_kg, box_length) *
         fourier_integral_1d(ModeIndex{}, {.rel_tol = check_tol(rel_tol)});
}

std::complex<double> fourier_integral_3d(ModeIndex mode, const Oracle3dOptions& options) {
  const int cells = options.grid;
  const int order = options.order;
  if (cells < 1 || order < 1) {
    throw Error(ErrorKind::InvalidParameters, "fourier_integral_3d: grid and order must be positive");
  }
  const auto rule = numeric::gauss_legendre(order);
  const double h = 1.0 / cells;

  // One-dimensional node set on [-1/2, 1/2]; cell centres are formed as
  // (2i + 1 - N) h / 2 so the central centre is exactly zero for odd N.
  std::vector<double> pos;
  std::vector<double> wt;
  pos.reserve(static_cast<std::size_t>(cells) * order);
  wt.reserve(pos.capacity());
  for (int i = 0; i < cells; ++i) {
    const double centre = (2.0 * i + 1.0 - cells) * 0.5 * h;
    for (int q = 0; q < order; ++q) {
      const double x = centre + 0.5 * h * rule.nodes[q];
      if (x == 0.0) {
        throw Error(ErrorKind::SingularityHandling,
                    "fourier_integral_3d: quadrature node at the origin (odd grid with odd order)");
      }
      pos.push_back(x);
      wt.push_back(0.5 * h * rule.weights[q]);
    }
  }
  const std::size_t m = pos.size();

  auto axis_phase = [&](int nj) {
    std::vector<std::complex<double>> out(m);
    for (std::size_t a = 0; a < m; ++a) {
      const double arg = -2.0 * pi * nj * pos[a];
      out[a] = wt[a] * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    return out;
  };
  const auto px = axis_phase(mode.nx);
  const auto py = axis_phase(mode.ny);
  const auto pz = axis_phase(mode.nz);

  std::vector<double> slab_re(m);
  std::vector<double> slab_im(m);
  parallel_for_index(m, [&](std::size_t a) {
    numeric::CompensatedSum re;
    numeric::CompensatedSum im;
    const double xa2 = pos[a] * pos[a];
    for (std::size_t b = 0; b < m; ++b) {
      const std::complex<double> fxy = px[a] * py[b];
      const double r2xy = xa2 + pos[b] * pos[b];
      std::complex<double> row{0.0, 0.0};
      for (std::size_t c = 0; c < m; ++c) {
        row += pz[c] / std::sqrt(r2xy + pos[c] * pos[c]);
      }
      const auto term = fxy * row;
      re.add(term.real());
      im.add(term.imag());
    }
    slab_re[a] = re.value();
    slab_im[a] = im.value();
  });
  return {numeric::pairwise_sum(slab_re), numeric::pairwise_sum(slab_im)};
}

namespace {

double oracle_3d_checked(ModeIndex mode, double mass_kg, double box_length, const Oracle3dOptions& options) {
  if (options.grid < 16) {
    throw Error(ErrorKind::InvalidParameters, "gk_oracle_3d: grid must be >= 16");
  }
  const auto value = fourier_integral_3d(mode, options);
  if (std::abs(value.imag()) > 1e-8 * std::abs(value.real())) {
    throw Error(ErrorKind::NonFinite, "gk_oracle_3d: imaginary residue " + format_g(value.imag()) +
                                          " exceeds 1e-8 of the real part");
  }
  return -gravity_scale(mass_kg, box_length) * value.real();
}

}  // namespace

double gk_oracle_3d(ModeIndex mode, double mass_kg, double box_length, const Oracle3dOptions& options) {
  require_nonzero(mode, "gk_oracle_3d");
  return oracle_3d_checked(mode, mass_kg, box_length, options);
}

double gk_oracle_3d(ZeroModeTag, double mass_kg, double box_length, const Oracle3dOptions& options) {
  return oracle_3d_checked(ModeIndex{}, mass_kg, box_length, options);
}

GravityCoupling GravityCoupling::for_box(double mass_kg, double box_length) {
  return {v0_closed_form(mass_kg, box_length), -gravity_scale(mass_kg, box_length) / pi};
}

double GravityCoupling::g_gk(std::int64_t n2) const {
  if (n2 <= 0) throw Error(ErrorKind::ZeroMode, "g_gk: zero mode");
  return gk_prefactor / static_cast<double>(n2);
}

}  // namespace qgbec::cube
