#include <doctest.h>

#include <cmath>

#include "jjosc/taylor.hpp"

using namespace jjosc;

TEST_CASE("equilibrium") {
  const auto p = CircuitParams::reference();
  CHECK(equilibrium(p, 0.0) == State{0.0, 0.0});
  CHECK(equilibrium(p, 0.05) == State{-0.05, 0.0});
  CHECK(equilibrium(p, 0.1) == State{-0.1, 0.0});
  CHECK_THROWS_AS(equilibrium(p, 0.25), DomainError);
  CHECK_THROWS_AS(equilibrium(p, -0.2), DomainError);
}

TEST_CASE("linearize") {
  const auto p = CircuitParams::reference();

  SUBCASE("zero bias is the plain LC circuit") {
    const auto m = linearize(p, 0.0);
    CHECK(m.A[0][0] == 0.0);
    CHECK(m.A[0][1] == 1.0 / p.L0());
    CHECK(m.A[1][0] == -1.0 / p.C0());
    CHECK(m.A[1][1] == 0.0);
    CHECK(m.B[0] == 0.0);
    CHECK(m.B[1] == -1.0 / p.C0());
    CHECK(m.c11 == 0.0);
    CHECK(m.c12 == 0.0);
    CHECK(m.omega0 == doctest::Approx(1.0 / std::sqrt(p.L0() * p.C0())).epsilon(1e-15));
  }

  SUBCASE("u_bar = 0.05") {
    const auto m = linearize(p, 0.05);
    CHECK(m.x_bar1 == -0.05);
    CHECK(m.x_bar2 == 0.0);
    CHECK(m.A[0][1] == doctest::Approx(0.19364916731037084).epsilon(1e-13));
    CHECK(m.omega0 == doctest::Approx(1.3915788418568703).epsilon(1e-13));
    CHECK(m.c11 == doctest::Approx(-0.26680551940539983).epsilon(1e-13));
    CHECK(m.k0 == doctest::Approx(-26.680551940539983).epsilon(1e-13));
    CHECK(m.c12 == 0.0);
  }

  SUBCASE("u_bar = 0.1") {
    CHECK(linearize(p, 0.1).omega0 == doctest::Approx(1.3160740129524925).epsilon(1e-13));
  }

  SUBCASE("omega0^2 = -A01 A10 and c11 is dh/dx1 at equilibrium") {
    for (double ub = -0.19; ub <= 0.19; ub += 0.01) {
      const auto m = linearize(p, ub);
      CHECK(m.omega0 * m.omega0 == doctest::Approx(-m.A[0][1] * m.A[1][0]).epsilon(1e-13));
      const double h = 1e-7;
      const double fd = (output_energy(p, {m.x_bar1 + h, 0.0}) - output_energy(p, {m.x_bar1 - h, 0.0})) / (2 * h);
      CHECK(m.c11 == doctest::Approx(fd).epsilon(1e-6).scale(1e-6));
    }
  }

  CHECK_THROWS_AS(linearize(p, 0.2), DomainError);
}

TEST_CASE("natural frequency curve") {
  const auto p = CircuitParams::reference();
  const std::vector<double> grid{-0.1, 0.0, 0.1};
  const auto curve = natural_frequency_curve(p, grid);
  REQUIRE(curve.size() == 3);
  CHECK(curve[1].omega0 == doctest::Approx(1.4142135623730951).epsilon(1e-14));
  CHECK(curve[0].omega0 == doctest::Approx(1.3160740129524925).epsilon(1e-13));
  CHECK(curve[0].omega0 == curve[2].omega0);

  CHECK(natural_frequency(p, 0.2 * (1 - 1e-10)) < 1e-2);
  CHECK_THROWS_AS(natural_frequency_curve(p, std::vector<double>{0.0, 0.2}), DomainError);

  double prev = natural_frequency(p, 0.0);
  for (int i = 1; i < 200; ++i) {
    const double x = 0.2 * i / 200.0;
    const double w = natural_frequency(p, x);
    CHECK(w < prev);
    CHECK(w == natural_frequency(p, -x));
    prev = w;
  }
}

TEST_CASE("linearized outputs") {
  const auto p = CircuitParams::reference();
  const auto m0 = linearize(p, 0.0);
  auto o = linearized_outputs(m0, p, 0.0, 0.0);
  CHECK(o.y0 == 0.0);
  CHECK(o.yl == 0.0);
  o = linearized_outputs(m0, p, 0.3, -0.4);
  CHECK(o.y0 == 0.0);
  CHECK(o.yl == doctest::Approx(0.5 * 5.0 * 0.09 + 0.5 * 0.1 * 0.16));
  // z1 outside |x1| < I0 is fine for the frozen-inductance output.
  CHECK_NOTHROW(linearized_outputs(m0, p, 5.0, 0.0));

  const auto m = linearize(p, 0.05);
  o = linearized_outputs(m, p, 0.01, 0.0);
  CHECK(o.yl == doctest::Approx(2.5819888974716113e-4).epsilon(1e-13));
  CHECK(o.y0 == doctest::Approx(-2.6680551940539983e-3).epsilon(1e-13));
}

TEST_CASE("magnitude response") {
  const auto p = CircuitParams::reference();
  const auto m = linearize(p, 0.05);
  CHECK(magnitude_response(m, 0.0) == doctest::Approx(std::abs(m.k0) / (m.omega0 * m.omega0)));
  CHECK(magnitude_response(m, 1.0) == doctest::Approx(28.489897675347873).epsilon(1e-12));
  CHECK(magnitude_response(m, 1e4) < 1e-6);
  CHECK_THROWS_AS(magnitude_response(m, m.omega0), ResonanceError);
  CHECK_THROWS_AS(magnitude_response(m, -1.0), DomainError);
}

TEST_CASE("linearized trajectory tracks the nonlinear one near equilibrium") {
  const auto p = CircuitParams::reference();
  auto run = [&](double ub, double offset) {
    const SimConfig cfg{0.01, 2000, {-ub + offset, 0.0}};
    return taylor_compare(p, cfg, BiasSine{ub, 0.0, 0.0});
  };

  SUBCASE("within 5% of the oscillation amplitude for |u_bar| <= I0/4") {
    for (double ub : {0.0, 0.02, 0.05}) {
      const auto cmp = run(ub, 0.02);
      CHECK(cmp.max_current_error() <= 0.05 * 0.02);
    }
  }

  SUBCASE("error grows with the operating point") {
    for (double offset : {0.01, 0.02, 0.05}) {
      CHECK(run(0.1, offset).max_current_error() > run(0.05, offset).max_current_error());
    }
  }

  SUBCASE("linear oscillation sits at omega0") {
    for (double ub : {0.05, 0.1}) {
      const auto cmp = run(ub, 0.02);
      const auto w = estimate_angular_frequency(cmp.linear.x1, 0.01);
      REQUIRE(w);
      CHECK(*w == doctest::Approx(cmp.model.omega0).epsilon(0.01));
    }
  }

  SUBCASE("outputs are filled per sample") {
    const auto cmp = run(0.05, 0.02);
    CHECK(cmp.y0.size() == cmp.linear.size());
    CHECK(cmp.yl.size() == cmp.linear.size());
    CHECK(cmp.linear.x1.front() == doctest::Approx(0.02));
  }

  SUBCASE("sinusoidal drive deviation reaches the linear model") {
    const SimConfig cfg{0.01, 500, {-0.05, 0.0}};
    const auto cmp = taylor_compare(p, cfg, BiasSine{0.05, 0.005, 0.5});
    CHECK(cmp.linear.u[0] == 0.0);
    CHECK(cmp.linear.u[100] == doctest::Approx(0.005 * std::sin(0.5)));
    CHECK(cmp.max_current_error() < 1e-3);
  }
}
