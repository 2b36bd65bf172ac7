#pragma once

// Forward recursion and boundary-residual root solve for the half-line world
// configuration. The recursion
//
//     x_{n+1}^2 = x_n^2 - 1 / (x_n S_n),   S_n = sum_{i<=n} 1/x_i^2,
//
// maps a trial x_1 to the full chain; the boundary condition at the pinned
// world x_{N+1} = 0 becomes the scalar residual
//
//     F(x_1) = x_N^3 S_N - 1,
//
// whose root fixes the configuration. F < 0 when x_1 is too small (the chain
// reaches 0 with mass to spare) and F > 0 when x_1 is too large, so the solve
// is a bracketed scalar root find; Newton-style steps are only ever taken
// inside a maintained bracket.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "miw/compensated.hpp"
#include "miw/model.hpp"

namespace miw {

enum class RecursionStatus { complete, early_collapse };

struct RecursionOutcome {
  RecursionStatus status = RecursionStatus::complete;
  int collapse_index = 0;            // k with x_{k+1}^2 <= 0; 0 when complete
  std::vector<double> positions;     // x_1..x_N, truncated at x_k on collapse
  std::vector<double> partial_sums;  // S_n alongside positions
};

namespace detail {

inline RecursionOutcome recursion_standard(double x1, int n_worlds) {
  RecursionOutcome out;
  out.positions.reserve(n_worlds);
  out.partial_sums.reserve(n_worlds);
  double x = x1;
  double t = x1 * x1;  // x_n^2
  double s = 1.0 / t;  // S_n
  out.positions.push_back(x);
  out.partial_sums.push_back(s);
  for (int n = 1; n < n_worlds; ++n) {
    t -= 1.0 / (x * s);
    if (!(t > 0.0)) {
      out.status = RecursionStatus::early_collapse;
      out.collapse_index = n;
      return out;
    }
    if (!std::isfinite(t))
      throw std::runtime_error("forward_recursion: non-finite recursion state");
    x = std::sqrt(t);
    s += 1.0 / t;
    out.positions.push_back(x);
    out.partial_sums.push_back(s);
  }
  return out;
}

// Same recursion with x_n^2 carried as a hi/lo pair and S_n under Neumaier
// compensation. Near the root the subtraction chain cancels heavily; the
// compensation keeps the residual floor about an order of magnitude below
// the naive path for N around 10^3.
inline RecursionOutcome recursion_extended(double x1, int n_worlds) {
  RecursionOutcome out;
  out.positions.reserve(n_worlds);
  out.partial_sums.reserve(n_worlds);
  auto [t_hi, t_lo] = two_prod(x1, x1);
  CompensatedSum s;
  s.add(refined_reciprocal(t_hi, t_lo));
  double x = x1;
  out.positions.push_back(x);
  out.partial_sums.push_back(s.value());
  for (int n = 1; n < n_worlds; ++n) {
    double sv = s.value();
    auto [p, pe] = two_prod(x, sv);
    double r = 1.0 / p;
    double re = std::fma(-p, r, 1.0) - pe * r;
    double step = std::fma(r, re, r);  // 1 / (x_n S_n)
    auto [u, ue] = two_sum(t_hi, -step);
    auto [v, ve] = two_sum(u, t_lo + ue);
    t_hi = v;
    t_lo = ve;
    if (!(t_hi > 0.0)) {
      out.status = RecursionStatus::early_collapse;
      out.collapse_index = n;
      return out;
    }
    if (!std::isfinite(t_hi))
      throw std::runtime_error("forward_recursion: non-finite recursion state");
    x = refined_sqrt(t_hi, t_lo);
    s.add(refined_reciprocal(t_hi, t_lo));
    out.positions.push_back(x);
    out.partial_sums.push_back(s.value());
  }
  return out;
}

}  // namespace detail

// Runs the recursion from a trial x_1 for n_worlds steps.
inline RecursionOutcome forward_recursion(double x1, int n_worlds,
                                          Precision precision = Precision::standard) {
  if (!(x1 > 0.0) || !std::isfinite(x1))
    throw std::invalid_argument("forward_recursion: x1 must be positive and finite");
  if (n_worlds < 1) throw std::invalid_argument("forward_recursion: n_worlds must be >= 1");
  return precision == Precision::extended ? detail::recursion_extended(x1, n_worlds)
                                          : detail::recursion_standard(x1, n_worlds);
}

struct BoundaryResidual {
  double value = 0.0;  // F(x_1), or a negative surrogate on early collapse
  RecursionStatus status = RecursionStatus::complete;
  int collapse_index = 0;
};

// Evaluates F(x_1). An early collapse means x_1 is below the root; the
// surrogate -1 - (N-k)/N continues F monotonically past its x_N -> 0+
// limit of -1, so bracketing logic needs no special case.
inline BoundaryResidual boundary_residual(double x1, int n_worlds,
                                          Precision precision = Precision::standard) {
  RecursionOutcome rec = forward_recursion(x1, n_worlds, precision);
  BoundaryResidual out;
  out.status = rec.status;
  out.collapse_index = rec.collapse_index;
  if (rec.status == RecursionStatus::early_collapse) {
    out.value = -1.0 - static_cast<double>(n_worlds - rec.collapse_index) / n_worlds;
  } else {
    double xn = rec.positions.back();
    out.value = xn * xn * xn * rec.partial_sums.back() - 1.0;
  }
  return out;
}

struct SolverConfig {
  double tolerance = 1e-12;  // on |F(x_1)|, not on x_1 itself
  int max_iterations = 200;  // refinement iteration cap
  Precision precision = Precision::extended;
  std::optional<std::pair<double, double>> bracket_hint;

  void validate() const {
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
      throw std::invalid_argument("SolverConfig: tolerance must be positive and finite");
    if (max_iterations < 1)
      throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    if (bracket_hint) {
      auto [lo, hi] = *bracket_hint;
      if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
        throw std::invalid_argument("SolverConfig: bracket_hint must satisfy 0 < lo < hi");
    }
  }
};

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solves F(x_1) = 0 for the given world count. Strategy: establish a sign
// change (expanding the default bracket geometrically if needed), scan the
// bracket for extra sign changes (reported, not resolved), then refine with
// a Brent-style bisection/interpolation loop. Success means some evaluated
// point reached |F| <= tolerance; otherwise a SolveError carries the best
// residual seen. Identical inputs take an identical evaluation path, so
// outputs are bit-identical within a precision mode.
inline WorldConfiguration solve_configuration(int n_worlds, const SolverConfig& config = {}) {
  if (n_worlds < 1) throw std::invalid_argument("solve_configuration: n_worlds must be >= 1");
  config.validate();

  int evaluations = 0;
  double best_x = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  auto residual = [&](double x) {
    ++evaluations;
    double f = boundary_residual(x, n_worlds, config.precision).value;
    if (std::abs(f) < std::abs(best_f)) {
      best_f = f;
      best_x = x;
    }
    return f;
  };
  auto fail = [&](const char* what, double lo, double hi) -> SolveError {
    std::ostringstream msg;
    msg << "solve_configuration: " << what << " for N=" << n_worlds << " (bracket [" << lo << ", "
        << hi << "], evaluations=" << evaluations << ", best |F|=" << std::abs(best_f)
        << " at x1=" << best_x << ", tolerance=" << config.tolerance
        << "); consider a looser tolerance, a larger iteration budget, or extended precision";
    return SolveError(msg.str());
  };

  // x_N <= x_1 and x_N >= N^{-1/3} would fail below the root, so N^{-1/3} is
  // a safe lower start; x_1 grows logarithmically in N, making 2 (1 + ln N)
  // a generous ceiling. Both are expanded geometrically if the signs say so.
  double lo = std::pow(static_cast<double>(n_worlds), -1.0 / 3.0);
  double hi = 2.0 * (1.0 + std::log(static_cast<double>(n_worlds)));
  if (config.bracket_hint) {
    lo = config.bracket_hint->first;
    hi = config.bracket_hint->second;
  }
  double flo = residual(lo);
  for (int k = 0; flo > 0.0 && k < 60; ++k) {
    lo *= 0.5;
    flo = residual(lo);
  }
  if (flo > 0.0) throw fail("no lower bracket endpoint found", lo, hi);
  if (hi <= lo) hi = 2.0 * lo;
  double fhi = residual(hi);
  for (int k = 0; fhi <= 0.0 && k < 60; ++k) {
    hi *= 2.0;
    fhi = residual(hi);
  }
  if (fhi <= 0.0) throw fail("no sign change found while expanding the bracket", lo, hi);

  // Diagnostic scan: the physical residual has a single root, so more than
  // one sign change flags either a pathological bracket hint or a numerical
  // breakdown; the count lands in SolveMeta for callers to inspect.
  int sign_changes = 0;
  double final_lo = lo;
  double final_hi = hi;
  {
    const int scan_points = 24;
    bool prev_neg = flo < 0.0;
    for (int i = 1; i <= scan_points; ++i) {
      double xs = lo + (hi - lo) * i / (scan_points + 1.0);
      bool neg = residual(xs) < 0.0;
      if (neg != prev_neg) ++sign_changes;
      prev_neg = neg;
    }
    if ((fhi < 0.0) != prev_neg) ++sign_changes;
  }

  if (std::abs(best_f) > config.tolerance) {
    // Brent-style refinement (bisection / secant / inverse quadratic), with
    // termination on the residual rather than on the bracket width.
    double a = lo, b = hi, fa = flo, fb = fhi;
    double c = b, fc = fb, d = b - a, e = d;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
      if ((fb > 0.0) == (fc > 0.0)) {
        c = a;
        fc = fa;
        d = b - a;
        e = d;
      }
      if (std::abs(fc) < std::abs(fb)) {
        a = b;
        b = c;
        c = a;
        fa = fb;
        fb = fc;
        fc = fa;
      }
      double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
      double xm = 0.5 * (c - b);
      if (std::abs(fb) <= config.tolerance) break;
      if (std::abs(xm) <= tol1) break;  // bracket exhausted at machine resolution
      if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
        double s = fb / fa, p, q;
        if (a == c) {
          p = 2.0 * xm * s;
          q = 1.0 - s;
        } else {
          q = fa / fc;
          double r = fb / fc;
          p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
          q = (q - 1.0) * (r - 1.0) * (s - 1.0);
        }
        if (p > 0.0) q = -q;
        p = std::abs(p);
        if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
          e = d;
          d = p / q;
        } else {
          d = xm;
          e = d;
        }
      } else {
        d = xm;
        e = d;
      }
      a = b;
      fa = fb;
      if (std::abs(d) > tol1)
        b += d;
      else
        b += (xm > 0.0 ? tol1 : -tol1);
      fb = residual(b);
    }
    final_lo = std::min(b, c);
    final_hi = std::max(b, c);
  }

  if (std::abs(best_f) > config.tolerance) {
    // Near the residual's double-precision floor only a handful of
    // representable x1 land inside tolerance; walk the immediate ulp
    // neighborhood of the best point before giving up.
    double center = best_x;
    double ulp = std::ldexp(1.0, std::ilogb(center) - 52);
    for (int k = -40; k <= 40 && std::abs(best_f) > config.tolerance; ++k) {
      if (k == 0) continue;
      double xk = center + k * ulp;
      if (xk > 0.0) residual(xk);
    }
  }

  if (!(std::abs(best_f) <= config.tolerance))
    throw fail("residual tolerance not met", final_lo, final_hi);

  RecursionOutcome rec = forward_recursion(best_x, n_worlds, config.precision);
  if (rec.status != RecursionStatus::complete)
    throw SolveError("solve_configuration: accepted x1 no longer completes the recursion");

  WorldConfiguration cfg;
  cfg.n_worlds = n_worlds;
  cfg.positions = std::move(rec.positions);
  cfg.x1_residual = best_f;
  cfg.solve_meta.evaluations = evaluations;
  cfg.solve_meta.bracket_lo = final_lo;
  cfg.solve_meta.bracket_hi = final_hi;
  cfg.solve_meta.sign_changes = sign_changes;
  cfg.solve_meta.precision = config.precision;
  cfg.solve_meta.tolerance = config.tolerance;
  return cfg;
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double limit = 0.0;
};

struct ValidationReport {
  int n_worlds = 0;
  double tolerance = 0.0;
  std::vector<ValidationCheck> checks;
  bool all_passed = true;
};

// Re-derives the defining properties of a solved configuration directly from
// the stored positions: ordering, positivity, sum 1/x_n = N, the boundary
// residual, and the x_N bounds N^{-1/2} <= x_N <= N^{-1/3}. Residual checks
// compare against tol; the bounds get tol as absolute slack so the N = 1
// equality case passes cleanly.
inline ValidationReport validate_configuration(const WorldConfiguration& cfg,
                                               double tol = 1e-9) {
  if (cfg.n_worlds < 1 || cfg.positions.size() != static_cast<std::size_t>(cfg.n_worlds))
    throw std::invalid_argument("validate_configuration: configuration size mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("validate_configuration: tol must be > 0");
  ValidationReport report;
  report.n_worlds = cfg.n_worlds;
  report.tolerance = tol;
  auto add = [&](const char* name, bool passed, double measured, double limit) {
    report.checks.push_back({name, passed, measured, limit});
    report.all_passed = report.all_passed && passed;
  };

  const auto& x = cfg.positions;
  const int n = cfg.n_worlds;

  double min_gap = x.back();  // includes the implicit gap down to x_{N+1} = 0
  for (std::size_t i = 0; i + 1 < x.size(); ++i) min_gap = std::min(min_gap, x[i] - x[i + 1]);
  add("strict_ordering", min_gap > 0.0, min_gap, 0.0);
  add("positivity", x.back() > 0.0, x.back(), 0.0);

  CompensatedSum inv;
  for (double xi : x) inv.add(1.0 / xi);
  double condition2 = std::abs(inv.value() - n) / n;
  add("condition2", condition2 <= tol, condition2, tol);

  CompensatedSum inv_sq;
  for (double xi : x) inv_sq.add(1.0 / (xi * xi));
  double xn = x.back();
  double residual = std::abs(xn * xn * xn * inv_sq.value() - 1.0);
  add("boundary_residual", residual <= tol, residual, tol);

  double lower = 1.0 / std::sqrt(static_cast<double>(n));
  double upper = std::pow(static_cast<double>(n), -1.0 / 3.0);
  add("xn_lower_bound", xn >= lower - tol, xn, lower);
  add("xn_upper_bound", xn <= upper + tol, xn, upper);
  return report;
}

}  // namespace miw
