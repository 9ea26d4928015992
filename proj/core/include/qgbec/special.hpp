#pragma once

#include <complex>

namespace qgbec::special {

/// Re[erf(x + iy)]. Relative accuracy is close to machine precision wherever the
/// result is representable. Throws NonFinite when the result overflows a double
/// (roughly y^2 - x^2 > 709) or the arguments are not finite.
double re_erf_complex(double x, double y);

/// exp(-y^2) * Re[erf(x + iy)]. Bounded by 1 in magnitude for all finite
/// arguments, so it never overflows.
double scaled_re_erf(double x, double y);

/// Same as scaled_re_erf with cos(2xy) and sin(2xy) supplied by the caller.
/// Integrands that keep 2xy on an exact multiple of pi pass the exact phase
/// here instead of paying the rounding of sin(2xy) near a zero.
double scaled_re_erf_with_phase(double x, double y, double cos_2xy, double sin_2xy);

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) by continued fraction.
/// Only valid for Im z >= 0 and |z| >= 20.
std::complex<double> faddeeva_far(std::complex<double> z);

}  // namespace qgbec::special
