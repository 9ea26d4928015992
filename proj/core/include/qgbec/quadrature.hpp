#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace qgbec::numeric {

/// Neumaier compensated accumulator. Summation order is the caller's order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fixed-order pairwise reduction with compensated leaves.
double pairwise_sum(std::span<const double> values);

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b]. Bisects the
/// interval with the largest error estimate until the total estimate drops
/// below max(abs_tol, rel_tol * |value|). Throws NoConvergence once
/// max_intervals is exhausted.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol = 0.0,
                                    int max_intervals = 4000);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` points, by Newton iteration on P_n.
GaussRule gauss_legendre(int order);

}  // namespace qgbec::numeric
