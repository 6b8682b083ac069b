#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "aloha/fluid.hpp"
#include "helpers.hpp"

using namespace aloha;

TEST_CASE("fluid_rhs evaluates the drift", "[fluid]") {
  SECTION("vanishes at the equilibrium") {
    auto model = test_helpers::reference_model();
    const EquilibriumResult eq = equilibrium(model);
    const Vec r = fluid_rhs(eq.z_e, model);
    for (double v : r) CHECK(std::abs(v) <= 1e-12);
  }
  SECTION("at the origin the drift is (1 - 1/e / |lambda|) lambda") {
    auto model = test_helpers::poisson_model({0.6, 0.4}, {1.0, 1.0});
    const Vec r = fluid_rhs({0.0, 0.0}, model);
    CHECK(r[0] == Catch::Approx(0.379272).margin(1e-6));
    CHECK(r[1] == Catch::Approx(0.252848).margin(1e-6));
  }
  SECTION("single class arithmetic") {
    auto model = test_helpers::poisson_model({1.0}, {0.5});
    const Vec r = fluid_rhs({1.0}, model);
    CHECK(r[0] == Catch::Approx(1.0 - 0.5 - kInvE).margin(1e-15));
  }
}

TEST_CASE("closed forms", "[fluid]") {
  CHECK(closed_form_1d(2.0, 1.0, 1.0, 0.0) == 2.0);
  CHECK(closed_form_1d(2.0, 1.0, 1.0, 1.0) == Catch::Approx(1.135335).margin(1e-6));
  CHECK(closed_form_1d(0.0, 1.0, 0.5, 200.0) == Catch::Approx(1.264241).margin(1e-6));

  const Vec lambda{0.6, 0.4};
  const Vec zero_t = closed_form_equal_a(lambda, 1.0, 0.0);
  CHECK(zero_t == Vec{0.0, 0.0});
  const Vec linear = closed_form_equal_a(lambda, 0.0, 1.0);
  CHECK(linear[0] == Catch::Approx(0.379272).margin(1e-6));
  CHECK(linear[1] == Catch::Approx(0.252848).margin(1e-6));
  const Vec limit = closed_form_equal_a(lambda, 1.0, 60.0);
  CHECK(limit[0] == Catch::Approx(0.379272).margin(1e-6));
  CHECK(limit[1] == Catch::Approx(0.252848).margin(1e-6));
}

TEST_CASE("RK4 integrator against the single-class closed form", "[fluid]") {
  auto model = test_helpers::poisson_model({1.0}, {1.0});

  SECTION("tight agreement at dt=1e-3 from both reference starts") {
    for (double z0 : {0.0, 2.0}) {
      const FluidTrajectory traj = integrate_fms({z0}, model, 10.0, 1e-3);
      double err = 0.0;
      for (std::size_t j = 0; j < traj.grid.size(); ++j)
        err = std::max(err, std::abs(traj.values[j][0] -
                                     closed_form_1d(z0, 1.0, 1.0, traj.grid[j])));
      CHECK(err <= 1e-8);
    }
  }

  SECTION("halving the step cuts the error about sixteenfold") {
    auto sup_error = [&](double dt) {
      const FluidTrajectory traj = integrate_fms({2.0}, model, 10.0, dt);
      double err = 0.0;
      for (std::size_t j = 0; j < traj.grid.size(); ++j)
        err = std::max(err, std::abs(traj.values[j][0] -
                                     closed_form_1d(2.0, 1.0, 1.0, traj.grid[j])));
      return err;
    };
    const double coarse = sup_error(0.1);
    const double fine = sup_error(0.05);
    CHECK(coarse / fine >= 12.0);
    CHECK(coarse / fine <= 20.0);
  }

  SECTION("equilibrium start stays put") {
    auto ref = test_helpers::reference_model();
    const EquilibriumResult eq = equilibrium(ref);
    const FluidTrajectory traj = integrate_fms(eq.z_e, ref, 10.0, 1e-3);
    for (const Vec& v : traj.values) REQUIRE(sup_dist(v, eq.z_e) <= 1e-8);
  }

  SECTION("difference quotient at the origin approaches the analytic slope") {
    auto model2 = test_helpers::poisson_model({0.6, 0.4}, {1.0, 1.0});
    const Vec want = fluid_derivative_at_zero(model2);
    double prev_err = 1e9;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
      const FluidTrajectory traj = integrate_fms({0.0, 0.0}, model2, 10 * dt, dt);
      double err = 0.0;
      for (int i = 0; i < 2; ++i) err = std::max(err, std::abs(traj.values[1][i] / dt - want[i]));
      CHECK(err < prev_err);
      prev_err = err;
    }
    CHECK(prev_err <= 1e-4);
  }

  SECTION("oversized steps abort instead of silently clamping") {
    CHECK_THROWS_AS(integrate_fms({10.0}, model, 30.0, 3.0), StepTooLarge);
  }
}

TEST_CASE("equilibrium solver", "[fluid]") {
  SECTION("single-class closed forms") {
    auto m1 = test_helpers::poisson_model({1.0}, {1.0});
    const EquilibriumResult eq1 = equilibrium(m1);
    CHECK(eq1.z_e[0] == Catch::Approx(1.0 - kInvE).margin(1e-10));

    auto m2 = test_helpers::poisson_model({1.0}, {0.5});
    CHECK(equilibrium(m2).z_e[0] == Catch::Approx(1.264241118).margin(1e-9));
  }
  SECTION("equal parameters split the mass evenly") {
    auto m = test_helpers::poisson_model({0.5, 0.5}, {1.0, 1.0});
    const EquilibriumResult eq = equilibrium(m);
    CHECK(eq.z_e[0] == Catch::Approx(0.316060).margin(1e-6));
    CHECK(eq.z_e[1] == Catch::Approx(0.316060).margin(1e-6));
  }
  SECTION("defining identity holds to 1e-9 on random models") {
    auto rng = test_helpers::make_rng(2024);
    std::uniform_int_distribution<int> classes(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
      auto m = test_helpers::random_model(rng, classes(rng));
      const EquilibriumResult eq = equilibrium(m);
      REQUIRE(eq.residual <= 1e-9);
      for (double z : eq.z_e) REQUIRE(z > 0.0);
    }
  }
  SECTION("the scalar equation is strictly decreasing on the bracket") {
    auto m = test_helpers::reference_model();
    auto f = [&](double x) {
      double s = 0.0;
      for (int i = 0; i < m.k(); ++i) s += m.p()[i] * m.lambda()[i] / (x + m.p()[i]);
      return s;
    };
    double prev = f(0.0);
    for (double x = 0.05; x < 4.0; x += 0.05) {
      const double v = f(x);
      REQUIRE(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("norm and coordinate bounds", "[fluid]") {
  SECTION("worked single-class numbers") {
    auto m = test_helpers::poisson_model({1.0}, {0.5});
    const auto [l, u] = fms_norm_bounds({0.0}, m);
    CHECK(l == 0.0);
    CHECK(u == Catch::Approx(1.264241).margin(1e-6));

    const auto [lc, uc] = fms_coord_bounds({2.0}, m);
    CHECK(uc[0] == Catch::Approx(2.0));
    CHECK(lc[0] > 0.0);
  }
  SECTION("two-class worked numbers") {
    auto m = test_helpers::poisson_model({0.5, 0.5}, {0.5, 1.0});
    const auto [l, u] = fms_norm_bounds({5.0, 5.0}, m);
    CHECK(u == Catch::Approx(10.0));
    CHECK(l == Catch::Approx(0.632121).margin(1e-6));
  }
  SECTION("the equilibrium lies inside the bounds") {
    auto m = test_helpers::reference_model();
    const EquilibriumResult eq = equilibrium(m);
    const auto [l, u] = fms_norm_bounds(eq.z_e, m);
    const double n = l1_norm(eq.z_e);
    CHECK(l <= n);
    CHECK(n <= u);
    const auto [lc, uc] = fms_coord_bounds(eq.z_e, m);
    for (int i = 0; i < m.k(); ++i) {
      CHECK(lc[i] <= eq.z_e[i]);
      CHECK(eq.z_e[i] <= uc[i]);
    }
  }
  SECTION("integrated trajectories respect the bounds at every grid point") {
    auto m = test_helpers::reference_model();
    for (Vec z0 : {Vec{2.0, 0.1}, Vec{0.05, 3.0}, Vec{1.0, 1.0}}) {
      const auto [l, u] = fms_norm_bounds(z0, m);
      const auto [lc, uc] = fms_coord_bounds(z0, m);
      const FluidTrajectory traj = integrate_fms(z0, m, 20.0, 1e-3);
      for (const Vec& z : traj.values) {
        const double n = l1_norm(z);
        REQUIRE(n >= l - 1e-9);
        REQUIRE(n <= u + 1e-9);
        for (int i = 0; i < m.k(); ++i) {
          REQUIRE(z[i] >= lc[i] - 1e-9);
          REQUIRE(z[i] <= uc[i] + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("Lyapunov apparatus", "[fluid]") {
  auto m = test_helpers::reference_model();
  const EquilibriumResult eq = equilibrium(m);
  const Vec& ze = eq.z_e;

  SECTION("value is a positive definite quadratic") {
    CHECK(lyapunov_value(ze, ze) == 0.0);
    CHECK(lyapunov_value({1.264241, 0.632121}, {0.632121, 0.632121}) ==
          Catch::Approx(0.632121).margin(1e-6));
    auto rng = test_helpers::make_rng(11);
    std::uniform_real_distribution<double> coord(0.01, 5.0);
    for (int i = 0; i < 1000; ++i) {
      Vec z{coord(rng), coord(rng)};
      if (sup_dist(z, ze) > 1e-12) REQUIRE(lyapunov_value(z, ze) > 0.0);
    }
  }

  SECTION("quadratic form is zero on multiples of z_e and otherwise nonnegative") {
    CHECK(lyapunov_quadratic_form(Vec{0.0, 0.0}, ze) == 0.0);
    for (double c : {-0.5, 0.3, 2.0}) {
      Vec y(ze);
      for (double& v : y) v *= c;
      CHECK(std::abs(lyapunov_quadratic_form(y, ze)) <= 1e-12);
    }
    auto rng = test_helpers::make_rng(12);
    std::uniform_real_distribution<double> coord(0.001, 5.0);
    for (int i = 0; i < 20000; ++i) {
      Vec y{coord(rng) - ze[0], coord(rng) - ze[1]};
      REQUIRE(lyapunov_quadratic_form(y, ze) >= -1e-12);
    }
  }

  SECTION("trajectory derivative is nonpositive on the positive orthant") {
    CHECK(std::abs(lyapunov_derivative(ze, ze, m)) <= 1e-12);
    auto rng = test_helpers::make_rng(13);
    std::uniform_real_distribution<double> coord(1e-4, 5.0);
    for (int i = 0; i < 20000; ++i) {
      Vec z{coord(rng) * ze[0], coord(rng) * ze[1]};
      REQUIRE(lyapunov_derivative(z, ze, m) <= 1e-12);
    }
  }

  SECTION("closed form matches the chain rule") {
    auto rng = test_helpers::make_rng(14);
    std::uniform_real_distribution<double> coord(0.05, 4.0);
    for (int i = 0; i < 2000; ++i) {
      Vec z{coord(rng), coord(rng)};
      const Vec r = fluid_rhs(z, m);
      double chain = 0.0;
      for (int c = 0; c < m.k(); ++c) chain += 2.0 * (z[c] - ze[c]) * r[c] / ze[c];
      REQUIRE(lyapunov_derivative(z, ze, m) == Catch::Approx(chain).margin(1e-8));
    }
  }

  SECTION("matches finite differences along an integrated trajectory") {
    const double dt = 1e-3;
    const FluidTrajectory traj = integrate_fms({2.0, 0.2}, m, 5.0, dt);
    for (std::size_t j = 1; j + 1 < traj.values.size(); j += 97) {
      const double fd = (lyapunov_value(traj.values[j + 1], ze) -
                         lyapunov_value(traj.values[j - 1], ze)) /
                        (2.0 * dt);
      const double an = lyapunov_derivative(traj.values[j], ze, m);
      REQUIRE(fd == Catch::Approx(an).margin(5e-5 + 1e-4 * std::abs(an)));
    }
  }

  SECTION("V decreases along trajectories and they reach the equilibrium") {
    for (Vec z0 : {Vec{1e-3, 1e-3}, Vec{5.0, 0.01}, Vec{3.0, 3.0}}) {
      const FluidTrajectory traj = integrate_fms(z0, m, 40.0, 1e-3);
      double prev = lyapunov_value(traj.values.front(), ze);
      for (std::size_t j = 1; j < traj.values.size(); ++j) {
        const double v = lyapunov_value(traj.values[j], ze);
        REQUIRE(v <= prev + 1e-8);
        prev = v;
      }
      REQUIRE(sup_dist(traj.values.back(), ze) <= 1e-4);
    }
  }
}
