#pragma once

// Energy bookkeeping for a world configuration. All momenta vanish in this
// stationary analysis, so the Hamiltonian reduces to the interworld
// (quantum-pressure) potential plus the Coulomb attraction. At a solved
// configuration
//
//     U_N = N/2,   V_N = -N,   H_N = (U_N + V_N) / (N+1) = -N / (2 (N+1)),
//
// which is also the lower bound the discrete system can reach, converging to
// the continuum first-excited-state energy -1/2 from above.

#include <cmath>
#include <cstdlib>
#include <vector>

#include "miw/compensated.hpp"
#include "miw/model.hpp"

namespace miw {

struct EnergyReport {
  int n_worlds = 0;
  double kinetic = 0.0;      // momentum term; identically zero here
  double interworld = 0.0;   // U_N
  double coulomb = 0.0;      // V_N
  double average_h = 0.0;    // (kinetic + U_N + V_N) / (N+1)
  double lower_bound = 0.0;  // -N / (2 (N+1))
  double residual_u = 0.0;   // |U_N - N/2|
  double residual_v = 0.0;   // |V_N + N|
  double residual_h = 0.0;   // |H_N - lower_bound|
};

// U_N = (1/2) sum_n D_n^2 x_n^4 with
// D_n = 1/(x_n (x_n^2 - x_{n+1}^2)) - 1/(x_{n-1} (x_{n-1}^2 - x_n^2));
// the implicit x_0 = inf zeroes the backward term at n = 1 and x_{N+1} = 0
// closes the chain. At a solution D_n collapses to 1/x_n^2.
inline double interworld_potential(const WorldConfiguration& cfg) {
  require_valid_configuration(cfg, "interworld_potential");
  const auto& x = cfg.positions;
  const int n = cfg.n_worlds;
  double u = 0.0;
  double backward = 0.0;  // forward term of the previous world
  for (int i = 0; i < n; ++i) {
    double next = i + 1 < n ? x[i + 1] : 0.0;
    double forward = 1.0 / (x[i] * (x[i] * x[i] - next * next));
    double dn = forward - backward;
    double x_sq = x[i] * x[i];
    u += dn * dn * x_sq * x_sq;
    backward = forward;
  }
  return 0.5 * u;
}

// V_N = -sum_n 1/x_n (each half-line world pairs with its mirror image, and
// the attraction is -1/|x| per world in these units).
inline double coulomb_potential(const WorldConfiguration& cfg) {
  require_valid_configuration(cfg, "coulomb_potential");
  CompensatedSum s;
  for (double xi : cfg.positions) s.add(1.0 / xi);
  return -s.value();
}

inline EnergyReport average_hamiltonian(const WorldConfiguration& cfg) {
  EnergyReport report;
  report.n_worlds = cfg.n_worlds;
  report.kinetic = 0.0;
  report.interworld = interworld_potential(cfg);
  report.coulomb = coulomb_potential(cfg);
  report.average_h = (report.kinetic + report.interworld + report.coulomb) / (cfg.n_worlds + 1.0);
  report.lower_bound = -cfg.n_worlds / (2.0 * (cfg.n_worlds + 1.0));
  report.residual_u = std::abs(report.interworld - 0.5 * cfg.n_worlds);
  report.residual_v = std::abs(report.coulomb + cfg.n_worlds);
  report.residual_h = std::abs(report.average_h - report.lower_bound);
  return report;
}

}  // namespace miw
