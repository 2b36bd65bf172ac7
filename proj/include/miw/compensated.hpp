#pragma once

// Compensated floating-point building blocks used by the extended-precision
// recursion path: Neumaier summation, error-free transforms, and one-step
// refined reciprocal/sqrt on hi/lo pairs.

#include <cmath>
#include <utility>

namespace miw {

// Neumaier variant of Kahan summation; value() returns sum + carried error.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double value() const { return sum + comp; }
};

// Error-free sum: returns (s, e) with s + e == a + b exactly.
inline std::pair<double, double> two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

// Error-free product via fused multiply-add.
inline std::pair<double, double> two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

// Reciprocal of hi + lo, refined with one Newton step against the full pair.
inline double refined_reciprocal(double hi, double lo) {
  double r = 1.0 / (hi + lo);
  double e = std::fma(-hi, r, 1.0) - lo * r;
  return std::fma(r, e, r);
}

// Square root of hi + lo, refined with one Newton step against the full pair.
inline double refined_sqrt(double hi, double lo) {
  double x = std::sqrt(hi + lo);
  double e = std::fma(-x, x, hi) + lo;
  return x + e / (2.0 * x);
}

}  // namespace miw
