#pragma once

// Empirical densities carried by a world configuration. The step density
// assigns each interval (x_{n+1}, x_n] the constant
//
//     v_n = x_n / ((N+1) (x_n^2 - x_{n+1}^2)) = x_n^2 S_n / (N+1),
//
// the two forms agreeing along the recursion. The generalized form replaces
// the Coulomb weight b(x) = 2 x^2 by an arbitrary positive weight, and the
// zero-bias transform maps a density to its size-biased companion; the
// target density is its unique fixed point, which is what makes these
// empirical objects converge to it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "miw/compensated.hpp"
#include "miw/model.hpp"
#include "miw/quadrature.hpp"

namespace miw {

namespace detail {

// Index of the interval (b[j], b[j-1]] containing x, for strictly decreasing
// breakpoints b. Returns -1 when x is outside (b.back(), b.front()].
inline int interval_index(const std::vector<double>& breakpoints, double x) {
  if (!(x > breakpoints.back()) || x > breakpoints.front()) return -1;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x, std::greater<double>());
  return static_cast<int>(it - breakpoints.begin()) - 1;
}

inline void require_buildable(const WorldConfiguration& cfg, const char* who) {
  require_valid_configuration(cfg, who);
  // strict ordering already excludes zero-width intervals; the final interval
  // (0, x_N] is non-degenerate because positions are positive
}

}  // namespace detail

// Piecewise-constant density on (0, x_1], zero elsewhere on the half line.
// breakpoints holds x_1 > ... > x_N > 0 followed by the pinned 0, so
// values[n] lives on (breakpoints[n+1], breakpoints[n]]. With
// half_line = false the density is evaluated at |x|, mirroring onto the
// negative axis; the mirrored version integrates to twice the half-line mass.
struct StepDensity {
  std::vector<double> breakpoints;
  std::vector<double> values;
  bool half_line = true;

  int n_worlds() const { return static_cast<int>(values.size()); }

  double operator()(double x) const {
    if (!half_line) x = std::abs(x);
    int j = detail::interval_index(breakpoints, x);
    return j < 0 ? 0.0 : values[j];
  }
};

inline StepDensity build_step_density(const WorldConfiguration& cfg, bool half_line = true) {
  detail::require_buildable(cfg, "build_step_density");
  StepDensity d;
  d.half_line = half_line;
  d.breakpoints = cfg.positions;
  d.breakpoints.push_back(0.0);
  d.values.resize(cfg.n_worlds);
  const double norm = cfg.n_worlds + 1.0;
  for (int n = 0; n < cfg.n_worlds; ++n) {
    double xn = d.breakpoints[n];
    double xn1 = d.breakpoints[n + 1];
    d.values[n] = xn / (norm * (xn * xn - xn1 * xn1));
  }
  return d;
}

// Step density for an arbitrary positive weight b: on (x_{n+1}, x_n] the
// value is b(x) c_n / (N+1) with c_n = sum_{i<=n} 1/b(x_i), so the density
// varies inside each interval unless b is constant.
struct GeneralizedStepDensity {
  std::vector<double> breakpoints;
  std::vector<double> cumulative;  // c_n
  std::function<double(double)> weight;
  bool half_line = true;

  int n_worlds() const { return static_cast<int>(cumulative.size()); }

  double operator()(double x) const {
    if (!half_line) x = std::abs(x);
    int j = detail::interval_index(breakpoints, x);
    if (j < 0) return 0.0;
    return weight(x) * cumulative[j] / (n_worlds() + 1.0);
  }
};

inline GeneralizedStepDensity build_generalized_density(const WorldConfiguration& cfg,
                                                        std::function<double(double)> weight,
                                                        bool half_line = true) {
  detail::require_buildable(cfg, "build_generalized_density");
  if (!weight) throw std::invalid_argument("build_generalized_density: weight must be callable");
  GeneralizedStepDensity d;
  d.half_line = half_line;
  d.breakpoints = cfg.positions;
  d.breakpoints.push_back(0.0);
  d.cumulative.resize(cfg.n_worlds);
  double c = 0.0;
  for (int n = 0; n < cfg.n_worlds; ++n) {
    double w = weight(cfg.positions[n]);
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("build_generalized_density: weight must be positive at worlds");
    c += 1.0 / w;
    d.cumulative[n] = c;
  }
  d.weight = std::move(weight);
  return d;
}

// Riemann mass sum_n v_n (x_n - x_{n+1}) over the half line. The implicit
// interval (x_1, x_0 = inf) carries the limit mass 1/(N+1); setting
// include_boundary_term adds it, turning the strict lower sandwich bound
// into an upper-side estimate.
inline double empirical_mass(const StepDensity& d, bool include_boundary_term = false) {
  double mass = 0.0;
  for (std::size_t n = 0; n < d.values.size(); ++n)
    mass += d.values[n] * (d.breakpoints[n] - d.breakpoints[n + 1]);
  if (include_boundary_term) mass += 1.0 / (d.n_worlds() + 1.0);
  return mass;
}

// Closed form of the half-line integral of the interpolated density
// x^2 S_n / (N+1), interval by interval. The n = 0 interval is included as
// its x_0 -> inf limit, which is exactly 1; for N = 1 the total is 1/3.
inline double empirical_integral(const StepDensity& d) {
  double total = 1.0;
  for (std::size_t n = 0; n < d.values.size(); ++n) {
    double xn = d.breakpoints[n];
    double xn1 = d.breakpoints[n + 1];
    total += 1.0 + xn1 * xn1 / (xn * (xn + xn1));
  }
  return total / (3.0 * (d.n_worlds() + 1.0));
}

enum class DistanceMetric { l1, sup, mass_deficit };

// Distance between a step density and a reference density on [0, inf).
// reference_tail_mass is the reference's mass beyond x_1, where the step
// density is identically zero. The sup metric is evaluated on interval
// endpoints plus a fixed interior sample, so it is a sampled estimate.
inline double density_distance(const StepDensity& d,
                               const std::function<double(double)>& reference,
                               double reference_tail_mass, DistanceMetric metric) {
  if (!reference) throw std::invalid_argument("density_distance: reference must be callable");
  switch (metric) {
    case DistanceMetric::l1: {
      double total = reference_tail_mass;
      for (std::size_t n = 0; n < d.values.size(); ++n) {
        // stay strictly inside the half-open interval: at the breakpoint
        // itself a stepped reference already belongs to the next interval
        double lo = std::nextafter(d.breakpoints[n + 1], d.breakpoints[n]);
        double hi = d.breakpoints[n];
        double v = d.values[n];
        total += integrate_adaptive([&](double x) { return std::abs(v - reference(x)); }, lo, hi,
                                    1e-10);
      }
      return total;
    }
    case DistanceMetric::sup: {
      double sup = 0.0;
      const int samples = 16;
      for (std::size_t n = 0; n < d.values.size(); ++n) {
        double lo = d.breakpoints[n + 1];
        double hi = d.breakpoints[n];
        double v = d.values[n];
        for (int i = 1; i <= samples; ++i) {
          double x = lo + (hi - lo) * i / samples;
          sup = std::max(sup, std::abs(v - reference(x)));
        }
      }
      // beyond x_1 the step density vanishes; sample the reference tail
      double x1 = d.breakpoints.front();
      sup = std::max(sup, std::abs(reference(std::nextafter(x1, infinite_endpoint))));
      for (int i = 1; i <= 4 * samples; ++i)
        sup = std::max(sup, std::abs(reference(x1 + 0.1 * i)));
      return sup;
    }
    case DistanceMetric::mass_deficit:
      return std::abs(empirical_mass(d, false) - 0.5);
  }
  throw std::invalid_argument("density_distance: unknown metric");
}

// Convenience overload against the Coulomb target, with the exact tail mass.
inline double density_distance(const StepDensity& d, const TargetDensity&,
                               DistanceMetric metric) {
  double tail = target_mass(d.breakpoints.front(), infinite_endpoint);
  return density_distance(
      d, [](double x) { return target_density(x); }, tail, metric);
}

struct ZeroBiasResult {
  double sigma_sq = 0.0;
  std::vector<double> values;  // transform evaluated on the input grid
};

// Zero-bias transform of a symmetric density p with respect to weight b:
//
//     sigma^2 = 2 int_0^inf w^2 p(w)/b(w) dw,
//     P*(z)   = b(z)/sigma^2 int_{|z|}^inf p(w)/b(w) dw.
//
// The Coulomb target p = 2 x^2 e^{-2|x|} with b = 2 x^2 has sigma^2 = 1/2
// and is the transform's fixed point. Integrands are truncated where they
// fall below 1e-16 of their running peak; quadrature runs at absolute
// tolerance 1e-10.
inline ZeroBiasResult zero_bias_transform(const std::function<double(double)>& source,
                                          const std::function<double(double)>& weight,
                                          const std::vector<double>& grid) {
  if (!source || !weight)
    throw std::invalid_argument("zero_bias_transform: source and weight must be callable");
  auto ratio = [&](double w) {
    double b = weight(w);
    if (b == 0.0) {
      // removable 0/0 node where the weight vanishes (the Coulomb b = 2x^2 at
      // the origin); extrapolate the one-sided limit so the quadrature sees a
      // continuous integrand instead of a spurious jump at the endpoint
      double h = 1e-6;
      double near = source(w + h) / weight(w + h);
      double nearer = source(w + 0.5 * h) / weight(w + 0.5 * h);
      return 2.0 * nearer - near;
    }
    return source(w) / b;
  };

  // scan for the integrand peak, then truncate where the tail is 16 orders down
  double peak = 0.0;
  double upper = 1.0;
  for (double w = 1.0 / 64.0; w <= 512.0; w *= 1.25) {
    double v = w * w * ratio(w);
    if (!std::isfinite(v))
      throw std::runtime_error("zero_bias_transform: non-finite integrand");
    if (v > peak) peak = v;
    if (v > peak * 1e-16) upper = w;
  }
  if (!(peak > 0.0)) throw std::runtime_error("zero_bias_transform: integrand vanishes");

  double sigma_sq =
      2.0 * integrate_adaptive([&](double w) { return w * w * ratio(w); }, 0.0, upper, 1e-10);
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
    throw std::runtime_error("zero_bias_transform: sigma^2 must be positive and finite");

  ZeroBiasResult out;
  out.sigma_sq = sigma_sq;
  out.values.reserve(grid.size());
  for (double z : grid) {
    double az = std::abs(z);
    double tail = az >= upper ? 0.0 : integrate_adaptive(ratio, az, upper, 1e-10);
    out.values.push_back(weight(z) * tail / sigma_sq);
  }
  return out;
}

}  // namespace miw
