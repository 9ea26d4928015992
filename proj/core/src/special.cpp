#include "qgbec/special.hpp"

#include <cmath>
#include <numbers>

#include "qgbec/errors.hpp"
#include "qgbec/quadrature.hpp"

namespace qgbec::special {

namespace {

// Beyond this |y| the series needs too many terms and the continued
// fraction for w is already at machine precision.
constexpr double kSeriesLimit = 20.0;
constexpr int kFractionDepth = 24;

// Re erf(x + iy) for x > 0, y >= 0, from the rapidly convergent expansion of
// Abramowitz & Stegun 7.1.29. With `scaled` the whole result carries an extra
// exp(-y^2), folded into each exponent so no intermediate overflows.
double series(double x, double y, double cos2, double sin2, bool scaled) {
  const double x2 = x * x;
  const double shift = scaled ? y * y : 0.0;
  const double sxy = std::sin(x * y);
  double result = std::erf(x) * std::exp(-shift);
  // (1 - cos 2xy) / (2 pi x) written without cancellation.
  result += std::exp(-x2 - shift) * sxy * sxy / (std::numbers::pi * x);

  const int n_max = static_cast<int>(std::ceil(2.0 * y)) + 16;
  numeric::CompensatedSum sum;
  for (int n = 1; n <= n_max; ++n) {
    const double nd = n;
    const double half_n = 0.5 * nd;
    const double ny = nd * y;
    const double e0 = -x2 - half_n * half_n - shift;
    const double c = std::exp(e0);
    double cosh_m1;
    double sinh_v;
    if (ny < 20.0) {
      const double h = std::sinh(0.5 * ny);
      cosh_m1 = 2.0 * c * h * h;
      sinh_v = c * std::sinh(ny);
    } else {
      // exp(e0 +- ny) with the square completed when scaled.
      const double ep = scaled ? std::exp(-x2 - (half_n - y) * (half_n - y)) : std::exp(e0 + ny);
      const double em = scaled ? std::exp(-x2 - (half_n + y) * (half_n + y)) : std::exp(e0 - ny);
      cosh_m1 = 0.5 * (ep + em) - c;
      sinh_v = 0.5 * (ep - em);
    }
    // f_n = 2x - 2x cosh(ny) cos 2xy + n sinh(ny) sin 2xy, regrouped.
    const double f = 4.0 * x * sxy * sxy * c - 2.0 * x * cos2 * cosh_m1 + nd * sin2 * sinh_v;
    sum.add(f / (nd * nd + 4.0 * x2));
  }
  return result + (2.0 / std::numbers::pi) * sum.value();
}

// erf(z) = 1 - exp(-z^2) w(iz), with iz = -y + ix in the upper half plane.
double far_field(double x, double y, double cos2, double sin2, bool scaled) {
  const auto w = faddeeva_far({-y, x});
  const double proj = cos2 * w.real() + sin2 * w.imag();
  if (scaled) return std::exp(-y * y) - std::exp(-x * x) * proj;
  return 1.0 - std::exp(y * y - x * x) * proj;
}

double evaluate(double x, double y, double cos2, double sin2, bool scaled) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorKind::NonFinite, "re_erf_complex: non-finite argument");
  }
  // Re erf is odd in x and even in y.
  if (x == 0.0) return 0.0;
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  const double ay = std::abs(y);
  // sin(2xy) flips with the sign of x*y; cos is even.
  const double s2 = (x < 0.0) != (y < 0.0) ? -sin2 : sin2;
  const double r = ay < kSeriesLimit ? series(ax, ay, cos2, s2, scaled)
                                     : far_field(ax, ay, cos2, s2, scaled);
  return sign * r;
}

}  // namespace

std::complex<double> faddeeva_far(std::complex<double> z) {
  std::complex<double> r{0.0, 0.0};
  for (int k = kFractionDepth; k >= 1; --k) r = (0.5 * k) / (z - r);
  return std::complex<double>{0.0, 1.0} / (std::sqrt(std::numbers::pi) * (z - r));
}

double re_erf_complex(double x, double y) {
  const double phase = 2.0 * x * y;
  const double v = evaluate(x, y, std::cos(phase), std::sin(phase), false);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFinite, "re_erf_complex: result overflows double");
  }
  return v;
}

double scaled_re_erf(double x, double y) {
  const double phase = 2.0 * x * y;
  return evaluate(x, y, std::cos(phase), std::sin(phase), true);
}

double scaled_re_erf_with_phase(double x, double y, double cos_2xy, double sin_2xy) {
  return evaluate(x, y, cos_2xy, sin_2xy, true);
}

}  // namespace qgbec::special
