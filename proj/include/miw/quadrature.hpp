#pragma once

// Adaptive Simpson quadrature on finite intervals. Used by the density
// distance metrics and the zero-bias transform; tails are truncated by the
// callers before integration.

#include <cmath>
#include <stdexcept>

namespace miw {

namespace detail {

template <typename F>
double adaptive_simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14 * (std::abs(a) + std::abs(b)))
    return left + right + delta / 15.0;
  if (depth <= 0)
    throw std::runtime_error("integrate_adaptive: refinement depth exhausted before convergence");
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Integrates f over [a, b] to absolute tolerance abs_tol. Throws
// std::runtime_error when the recursion depth is exhausted first.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-10,
                          int max_depth = 48) {
  if (!(b >= a)) throw std::invalid_argument("integrate_adaptive: b must be >= a");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate_adaptive: abs_tol must be > 0");
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

}  // namespace miw
