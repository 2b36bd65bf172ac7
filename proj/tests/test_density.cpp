#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "miw/density.hpp"
#include "miw/harness.hpp"
#include "miw/quadrature.hpp"
#include "miw/solver.hpp"

TEST_CASE("step density: single world") {
  auto cfg = miw::solve_configuration(1);
  auto d = miw::build_step_density(cfg);
  REQUIRE(d.n_worlds() == 1);
  // v_1 = x_1 / ((N+1) x_1^2) = 1/2 on (0, 1]
  CHECK(d.values[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d(0.5) == d.values[0]);
  CHECK(d(1.0) == d.values[0]);
  CHECK(d(0.0) == 0.0);
  CHECK(d(1.0000001) == 0.0);
  CHECK(d(-0.5) == 0.0);

  auto full = miw::build_step_density(cfg, false);
  CHECK(full(-0.5) == full(0.5));
  CHECK(full(0.0) == 0.0);
  CHECK(miw::empirical_mass(d, false) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(miw::empirical_mass(d, true) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(miw::empirical_integral(d) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("step density: values match x_n^2 S_n / (N+1) along the recursion") {
  auto cfg = miw::solve_configuration(11);
  auto rec = miw::forward_recursion(cfg.positions.front(), 11, miw::Precision::extended);
  REQUIRE(rec.status == miw::RecursionStatus::complete);
  auto d = miw::build_step_density(cfg);
  for (int n = 0; n < 11; ++n) {
    double expected = rec.positions[n] * rec.positions[n] * rec.partial_sums[n] / 12.0;
    CHECK(d.values[n] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("step density: interval lookup is half-open on the left") {
  miw::WorldConfiguration cfg;
  cfg.n_worlds = 3;
  cfg.positions = {3.0, 2.0, 1.0};
  auto d = miw::build_step_density(cfg);
  CHECK(d(3.0) == d.values[0]);
  CHECK(d(2.5) == d.values[0]);
  CHECK(d(2.0) == d.values[1]);
  CHECK(d(1.0) == d.values[2]);
  CHECK(d(0.2) == d.values[2]);
  CHECK(d(3.5) == 0.0);
}

TEST_CASE("step density: builder rejects degenerate configurations") {
  miw::WorldConfiguration cfg;
  cfg.n_worlds = 2;
  cfg.positions = {1.0, 1.0};
  CHECK_THROWS_AS(miw::build_step_density(cfg), std::invalid_argument);
  cfg.positions = {1.0, 2.0};
  CHECK_THROWS_AS(miw::build_step_density(cfg), std::invalid_argument);
  cfg.positions = {1.0, -1.0};
  CHECK_THROWS_AS(miw::build_step_density(cfg), std::invalid_argument);
  cfg.positions = {1.0};
  CHECK_THROWS_AS(miw::build_step_density(cfg), std::invalid_argument);  // size mismatch
}

TEST_CASE("empirical masses: frozen values for the figure world counts") {
  auto c11 = miw::solve_configuration(11);
  auto d11 = miw::build_step_density(c11);
  CHECK(miw::empirical_mass(d11, false) == doctest::Approx(0.5395688759983673).epsilon(1e-9));
  CHECK(miw::empirical_mass(d11, true) == doctest::Approx(0.6229022093317007).epsilon(1e-9));
  CHECK(miw::empirical_integral(d11) == doctest::Approx(0.4377498104971443).epsilon(1e-9));

  auto c21 = miw::solve_configuration(21);
  auto d21 = miw::build_step_density(c21);
  CHECK(miw::empirical_mass(d21, false) == doctest::Approx(0.5262240567298241).epsilon(1e-9));
  CHECK(miw::empirical_mass(d21, true) == doctest::Approx(0.5716786021843695).epsilon(1e-9));
  CHECK(miw::empirical_integral(d21) == doctest::Approx(0.4610632521575466).epsilon(1e-9));

  // sandwich: mass with boundary stays above 1/2, interpolated integral below
  CHECK(miw::empirical_mass(d11, true) > 0.5);
  CHECK(miw::empirical_integral(d11) < 0.5);
  CHECK(miw::empirical_mass(d21, true) > 0.5);
  CHECK(miw::empirical_integral(d21) < 0.5);
}

TEST_CASE("boundary term equals 1/(N+1)") {
  auto cfg = miw::solve_configuration(7);
  auto d = miw::build_step_density(cfg);
  CHECK(miw::empirical_mass(d, true) - miw::empirical_mass(d, false) ==
        doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("generalized density: Coulomb weight reproduces the step density") {
  auto cfg = miw::solve_configuration(11);
  auto d = miw::build_step_density(cfg);
  auto g = miw::build_generalized_density(cfg, miw::TargetDensity::weight);
  REQUIRE(g.n_worlds() == 11);
  // c_n = S_n / 2, so at each world position the two densities coincide
  for (double xn : cfg.positions) CHECK(g(xn) == doctest::Approx(d(xn)).epsilon(1e-12));
  CHECK(g(0.0) == 0.0);
  CHECK(g(cfg.positions.front() * 1.01) == 0.0);

  // between worlds the generalized density is the x^2-interpolated profile,
  // so its half-line integral is the closed-form interpolated integral minus
  // the n = 0 tail term 1/(3(N+1)); integrate interval by interval since g
  // jumps at the breakpoints
  double integral = 0.0;
  for (std::size_t n = 0; n < g.breakpoints.size() - 1; ++n) {
    double lo = std::nextafter(g.breakpoints[n + 1], g.breakpoints[n]);
    integral += miw::integrate_adaptive([&](double x) { return g(x); }, lo, g.breakpoints[n], 1e-11);
  }
  CHECK(integral ==
        doctest::Approx(miw::empirical_integral(d) - 1.0 / (3.0 * 12.0)).epsilon(1e-8));
}

TEST_CASE("generalized density: mirrored evaluation and input validation") {
  auto cfg = miw::solve_configuration(5);
  auto g = miw::build_generalized_density(cfg, [](double x) { return 1.0 + x * x; }, false);
  CHECK(g(-0.3) == g(0.3));
  CHECK_THROWS_AS(miw::build_generalized_density(cfg, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(miw::build_generalized_density(cfg, [](double) { return 0.0; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(miw::build_generalized_density(cfg, [](double) { return -2.0; }),
                  std::invalid_argument);
}

TEST_CASE("density distance: identity reference gives zero") {
  auto cfg = miw::solve_configuration(5);
  auto d = miw::build_step_density(cfg);
  auto self = [&d](double x) { return d(x); };
  CHECK(miw::density_distance(d, self, 0.0, miw::DistanceMetric::l1) == 0.0);
  CHECK(miw::density_distance(d, self, 0.0, miw::DistanceMetric::sup) == 0.0);
}

TEST_CASE("density distance: against the Coulomb target") {
  auto d11 = miw::build_step_density(miw::solve_configuration(11));
  auto d21 = miw::build_step_density(miw::solve_configuration(21));
  double l1_11 = miw::density_distance(d11, miw::TargetDensity{}, miw::DistanceMetric::l1);
  double l1_21 = miw::density_distance(d21, miw::TargetDensity{}, miw::DistanceMetric::l1);
  CHECK(l1_11 > 0.0);
  CHECK(l1_21 < l1_11);  // finer discretization moves toward the target

  double sup_11 = miw::density_distance(d11, miw::TargetDensity{}, miw::DistanceMetric::sup);
  CHECK(sup_11 > 0.0);
  CHECK(sup_11 < 1.0);

  double deficit = miw::density_distance(d11, miw::TargetDensity{}, miw::DistanceMetric::mass_deficit);
  CHECK(deficit == doctest::Approx(std::abs(miw::empirical_mass(d11, false) - 0.5)).epsilon(1e-14));

  auto broken = std::function<double(double)>();
  CHECK_THROWS_AS(miw::density_distance(d11, broken, 0.0, miw::DistanceMetric::l1),
                  std::invalid_argument);
}

TEST_CASE("zero-bias transform: the target is a fixed point") {
  std::vector<double> grid;
  for (int i = 0; i <= 120; ++i) grid.push_back(4.0 * i / 120.0);
  auto result = miw::zero_bias_transform([](double x) { return miw::target_density(x); },
                                         miw::TargetDensity::weight, grid);
  CHECK(result.sigma_sq == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(result.values.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(result.values[i] - miw::target_density(grid[i])) <= 1e-8);
  CHECK(result.values[0] == 0.0);  // the weight pins the node at the origin
}

TEST_CASE("zero-bias transform: symmetry and degenerate inputs") {
  auto source = [](double x) { return miw::target_density(x); };
  auto result = miw::zero_bias_transform(source, miw::TargetDensity::weight,
                                         {-2.0, -1.0, 0.0, 1.0, 2.0});
  CHECK(result.values[0] == result.values[4]);
  CHECK(result.values[1] == result.values[3]);

  CHECK_THROWS_AS(miw::zero_bias_transform(nullptr, miw::TargetDensity::weight, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(miw::zero_bias_transform(source, nullptr, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(miw::zero_bias_transform(source, [](double) { return 0.0; }, {1.0}),
                  std::runtime_error);
  CHECK_THROWS_AS(
      miw::zero_bias_transform([](double) { return 0.0; }, miw::TargetDensity::weight, {1.0}),
      std::runtime_error);
}

TEST_CASE("zero-bias transform: gaussian cross-check with unit weight") {
  // with b = 1, sigma^2 is the variance and P*(z) reduces to the survival
  // function 1 - Phi(|z|), both known in closed form
  auto normal = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 3.0};
  auto result = miw::zero_bias_transform(normal, [](double) { return 1.0; }, grid);
  CHECK(result.sigma_sq == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double expected = 0.5 * std::erfc(grid[i] / std::sqrt(2.0));
    CHECK(result.values[i] == doctest::Approx(expected).epsilon(1e-6));
  }
}
