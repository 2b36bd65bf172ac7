#include <cmath>
#include <random>

#include <doctest.h>

#include "miw/energy.hpp"
#include "miw/solver.hpp"

TEST_CASE("energy: single world in closed form") {
  auto report = miw::average_hamiltonian(miw::solve_configuration(1));
  CHECK(report.kinetic == 0.0);
  CHECK(report.interworld == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(report.coulomb == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(report.average_h == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(report.lower_bound == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("energy: hand-worked unsolved configuration") {
  // positions {2, 1}: D_1 = 1/6, D_2 = 1 - 1/6 = 5/6, so
  // U = (16 D_1^2 + D_2^2)/2 = 41/72 and V = -(1/2 + 1) = -3/2
  miw::WorldConfiguration cfg;
  cfg.n_worlds = 2;
  cfg.positions = {2.0, 1.0};
  CHECK(miw::interworld_potential(cfg) == doctest::Approx(41.0 / 72.0).epsilon(1e-15));
  CHECK(miw::coulomb_potential(cfg) == doctest::Approx(-1.5).epsilon(1e-15));
  auto report = miw::average_hamiltonian(cfg);
  CHECK(report.average_h == doctest::Approx((41.0 / 72.0 - 1.5) / 3.0).epsilon(1e-14));
  // an unsolved configuration sits strictly above the bound
  CHECK(report.average_h > report.lower_bound);
  CHECK(report.residual_u > 1e-3);
}

TEST_CASE("energy: solved configurations satisfy the closed-form identities") {
  for (int n : {2, 5, 11, 21, 50, 100}) {
    auto report = miw::average_hamiltonian(miw::solve_configuration(n));
    CHECK(report.n_worlds == n);
    CHECK(report.residual_u / n <= 1e-9);   // U = N/2
    CHECK(report.residual_v / n <= 1e-9);   // V = -N
    CHECK(report.residual_h <= 1e-9);       // H = -N/(2(N+1))
    CHECK(report.residual_h <= 1e-12);      // the identity is exact, not asymptotic
    CHECK(report.lower_bound == doctest::Approx(-n / (2.0 * (n + 1.0))).epsilon(1e-15));
  }
}

TEST_CASE("energy: average H decreases toward -1/2 from above") {
  double prev = 0.0;
  for (int n : {1, 2, 5, 11, 21, 50}) {
    auto report = miw::average_hamiltonian(miw::solve_configuration(n));
    CHECK(report.average_h < prev);
    CHECK(report.average_h > -0.5);
    prev = report.average_h;
  }
}

TEST_CASE("energy: validation of inputs") {
  miw::WorldConfiguration cfg;
  cfg.n_worlds = 2;
  cfg.positions = {1.0, 2.0};
  CHECK_THROWS_AS(miw::interworld_potential(cfg), std::invalid_argument);
  CHECK_THROWS_AS(miw::coulomb_potential(cfg), std::invalid_argument);
  CHECK_THROWS_AS(miw::average_hamiltonian(cfg), std::invalid_argument);
  cfg.positions = {2.0, 2.0};
  CHECK_THROWS_AS(miw::interworld_potential(cfg), std::invalid_argument);
  cfg.positions = {2.0};
  CHECK_THROWS_AS(miw::interworld_potential(cfg), std::invalid_argument);
}

TEST_CASE("energy: random perturbations never drop below the solved value") {
  auto cfg = miw::solve_configuration(21);
  double solved = miw::average_hamiltonian(cfg).average_h;
  std::mt19937 rng(4242u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto perturbed = cfg;
    for (int i = 0; i < cfg.n_worlds; ++i) {
      double up = (i == 0 ? cfg.positions[0] : cfg.positions[i - 1]) - cfg.positions[i];
      double down = cfg.positions[i] - (i + 1 < cfg.n_worlds ? cfg.positions[i + 1] : 0.0);
      double room = 0.25 * std::min(i == 0 ? down : up, down);
      perturbed.positions[i] = cfg.positions[i] + room * u(rng);
    }
    REQUIRE(miw::has_valid_ordering(perturbed.positions));
    double h = miw::average_hamiltonian(perturbed).average_h;
    CHECK(h >= solved - 1e-12);
  }
}
