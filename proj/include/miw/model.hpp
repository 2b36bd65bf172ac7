#pragma once

// Physical model of the 1d Coulomb problem in its first excited state,
// expressed in dimensionless units, plus the core world-configuration type.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace miw {

// Dimensionless unit system: m = e = hbar = 1, so the length scale
// hbar^2/(m e^2) and the energy scale m e^4/hbar^2 are both 1. Every
// quantity in this library is expressed in these units; they are fixed
// at compile time and not configurable.
struct DimensionlessUnits {
  static constexpr double mass = 1.0;
  static constexpr double charge = 1.0;
  static constexpr double hbar = 1.0;
  static constexpr double length_scale = 1.0;  // hbar^2 / (m e^2)
  static constexpr double energy_scale = 1.0;  // m e^4 / hbar^2
};

// Distinguished endpoint for half-open integration ranges. Using the IEEE
// infinity keeps the antiderivative limit exact instead of approximating
// with a large float.
inline constexpr double infinite_endpoint = std::numeric_limits<double>::infinity();

// First excited state of the 1d Coulomb potential. The full-line density is
//
//     P(x) = |Psi_1(x)|^2 = 2 x^2 e^{-2|x|},
//
// a weighted Laplace density with weight b(x) = 2 x^2. The full line carries
// mass 1, the half line x >= 0 carries mass 1/2. All solver work happens on
// the half line; full-line results are produced by mirror symmetry.
struct TargetDensity {
  // Normalization constant of Psi_1.
  static constexpr double wavefunction_normalization = std::numbers::sqrt2;

  // Psi_1(x) = sqrt(2) x e^{-|x|}
  static double wavefunction(double x) {
    return wavefunction_normalization * x * std::exp(-std::abs(x));
  }

  // P(x) = 2 x^2 e^{-2|x|}; total function, even, P(0) = 0.
  static double density(double x) {
    return 2.0 * x * x * std::exp(-2.0 * std::abs(x));
  }

  // Weight b(x) with P(x) = b(x) e^{-2|x|}.
  static double weight(double x) { return 2.0 * x * x; }

  // Antiderivative of 2 x^2 e^{-2x} on x >= 0, tending to 0 as x -> inf.
  static double antiderivative(double x) {
    if (std::isinf(x)) return 0.0;
    return -std::exp(-2.0 * x) * ((x + 1.0) * x + 0.5);
  }

  // Exact mass of P on [lo, hi] for 0 <= lo <= hi; hi may be
  // infinite_endpoint. mass(0, inf) = 1/2.
  static double mass(double lo, double hi) {
    if (!(lo >= 0.0)) throw std::invalid_argument("target_mass: lo must be >= 0");
    if (!(hi >= lo)) throw std::invalid_argument("target_mass: hi must be >= lo");
    return antiderivative(hi) - antiderivative(lo);
  }
};

inline double target_density(double x) { return TargetDensity::density(x); }
inline double target_mass(double lo, double hi) { return TargetDensity::mass(lo, hi); }

// Accumulation strategy for the solver's running sums. Extended mode carries
// the squared positions as hi/lo pairs and the partial sums with Neumaier
// compensation, which keeps the boundary residual resolvable down to the
// default tolerance for N in the thousands.
enum class Precision { standard, extended };

inline const char* to_string(Precision p) {
  return p == Precision::extended ? "extended" : "standard";
}

struct SolveMeta {
  int evaluations = 0;       // residual evaluations (bracketing + scan + refinement)
  double bracket_lo = 0.0;   // bracket around x_1 after expansion
  double bracket_hi = 0.0;
  int sign_changes = 0;      // sign flips observed while scanning the bracket
  Precision precision = Precision::extended;
  double tolerance = 0.0;
};

// Half-line world configuration x_1 > x_2 > ... > x_N > 0. The worlds
// x_0 = inf and x_{N+1} = 0 are implicit; the full symmetric system has
// 2N+1 worlds with one world pinned at the node x = 0.
struct WorldConfiguration {
  int n_worlds = 0;
  std::vector<double> positions;
  double x1_residual = 0.0;  // boundary residual at the accepted x_1
  SolveMeta solve_meta;
};

// True when positions are strictly decreasing and strictly positive.
inline bool has_valid_ordering(const std::vector<double>& positions) {
  if (positions.empty()) return false;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!(positions[i] > 0.0) || !std::isfinite(positions[i])) return false;
    if (i + 1 < positions.size() && !(positions[i] > positions[i + 1])) return false;
  }
  return true;
}

inline void require_valid_configuration(const WorldConfiguration& cfg, const char* who) {
  if (cfg.n_worlds < 1 || cfg.positions.size() != static_cast<std::size_t>(cfg.n_worlds))
    throw std::invalid_argument(std::string(who) + ": configuration size mismatch");
  if (!has_valid_ordering(cfg.positions))
    throw std::invalid_argument(std::string(who) +
                                ": positions must be strictly decreasing and positive");
}

}  // namespace miw
