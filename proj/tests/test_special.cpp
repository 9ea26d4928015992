#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qgbec/errors.hpp"
#include "qgbec/special.hpp"
#include "support.hpp"

using namespace qgbec;

namespace {

struct ErfRef {
  double x, y, value, scaled;
};

// 50-digit mpmath values of Re erf(x + iy) and exp(-y^2) Re erf(x + iy).
constexpr ErfRef kRefs[] = {
    {1, 0, 0.84270079294971487, 0.84270079294971487},
    {0.5, 0.9424777960769379, 1.0975485040737856, 0.45149754839484692},
    {2, 3, -20.829461427614568, -0.0025705597540129624},
    {0.1, 5, 6817477771.5138365, 0.094680748591424169},
    {3, -2, 0.99896327885681727, 0.01829665067864733},
    {-1.5, 4, 102364.77200970444, 0.011519637503209214},
    {5, 5, 0.93037960374309512, 1.2921059709891574e-11},
    {0.01, 10, 3.0129344562477771e+41, 0.011208345088012756},
    {10, 20, -2.5769367545025998e+128, -4.9352709248782428e-46},
    {1, 25, -6.7843830841082151e+268, -0.002497233619635802},
    {0.2, 0.2, 0.231546715363015, 0.2224676387911938},
    {4, 0.5, 1.0000000110175495, 0.77880079165188101},
    {0.001, 3, 9.1432931853448688, 0.0011283720207104825},
    {0.5, 26, 4.8554246842821518e+291, 0.012681115416709146},
    {7, 0.001, 1.0, 0.9999990000005},
};

// Straight-contour oracle: erf(z) = (2/sqrt(pi)) z \int_0^1 exp(-(t z)^2) dt,
// composite Simpson with many panels.
double contour_re_erf(double x, double y) {
  const std::complex<double> z{x, y};
  const int n = 20000;
  std::complex<double> acc{0.0, 0.0};
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::exp(-(t * z) * (t * z));
  }
  acc *= 1.0 / (3.0 * n);
  return (2.0 / std::sqrt(std::numbers::pi) * z * acc).real();
}

}  // namespace

TEST_CASE("Re erf against high-precision references") {
  for (const auto& r : kRefs) {
    CAPTURE(r.x);
    CAPTURE(r.y);
    CHECK(test::rel_diff(special::re_erf_complex(r.x, r.y), r.value) < 1e-13);
    CHECK(test::rel_diff(special::scaled_re_erf(r.x, r.y), r.scaled) < 1e-13);
  }
}

TEST_CASE("real axis and imaginary axis") {
  for (double x : {0.05, 0.3, 1.0, 2.5, 6.0}) CHECK(test::rel_diff(special::re_erf_complex(x, 0.0), std::erf(x)) < 1e-15);
  for (double y : {0.0, 0.7, 3.0, 15.0, 40.0}) CHECK(special::re_erf_complex(0.0, y) == 0.0);
}

TEST_CASE("contour quadrature oracle at (0.5, 0.3 pi)") {
  const double y = 0.3 * std::numbers::pi;
  CHECK(test::rel_diff(special::re_erf_complex(0.5, y), contour_re_erf(0.5, y)) < 1e-12);
  CHECK(test::rel_diff(special::re_erf_complex(1.3, 1.1), contour_re_erf(1.3, 1.1)) < 1e-12);
}

TEST_CASE("symmetry: odd in x, even in y") {
  for (double x : {0.2, 1.7, 4.0}) {
    for (double y : {0.4, 3.0, 22.0}) {
      const double a = special::scaled_re_erf(x, y);
      CHECK(special::scaled_re_erf(-x, y) == -a);
      CHECK(special::scaled_re_erf(x, -y) == a);
    }
  }
}

TEST_CASE("scaled form stays bounded where the plain form overflows") {
  CHECK_THROWS_AS(special::re_erf_complex(0.5, 30.0), Error);
  CHECK(std::abs(special::scaled_re_erf(0.5, 30.0)) < 1.0);
  CHECK(special::scaled_re_erf(50.0, 50.0) == doctest::Approx(0.0));
  try {
    (void)special::re_erf_complex(std::nan(""), 1.0);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
  }
}

TEST_CASE("Faddeeva continued fraction against scipy wofz") {
  struct W {
    double re, im, wre, wim;
  };
  constexpr W refs[] = {
      {-20, 1, 0.0014122347663929663, -0.028173995667521986},
      {3, 25, 0.022230708913682146, 0.002663493489785072},
      {0.5, 30, 0.018790683663577543, 0.0003128311437578234},
      {-40, 0.01, 3.52949565107797e-06, -0.014109150575331148},
      {15, 15, 0.018827145325136758, 0.018785354277995648},
  };
  for (const auto& r : refs) {
    const auto w = special::faddeeva_far({r.re, r.im});
    CHECK(test::rel_diff(w.real(), r.wre) < 1e-11);
    CHECK(test::rel_diff(w.imag(), r.wim) < 1e-11);
  }
}

TEST_CASE("supplied exact phase matches the computed phase") {
  for (int n : {1, 2, 3, 5}) {
    for (double v : {0.05, 0.3, 1.0, 4.0}) {
      const double x = 0.5 / v;
      const double y = std::numbers::pi * n * v;
      const double exact = special::scaled_re_erf_with_phase(x, y, n % 2 ? -1.0 : 1.0, 0.0);
      CHECK(exact == doctest::Approx(special::scaled_re_erf(x, y)).epsilon(1e-9).scale(1e-300));
    }
  }
}
