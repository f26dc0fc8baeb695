#include <doctest.h>

#include <cmath>

#include "jjosc/feedback_linearization.hpp"
#include "jjosc/trainer.hpp"

using namespace jjosc;

namespace {

// Stepped reference shipped with the training scenarios.
DriveSignal stepped_reference() {
  return PiecewiseConstant({{0.0, 0.0191}, {2.0, 0.0081}, {4.0, 0.0012}, {6.0, 0.0005}, {8.0, 0.0244}});
}

TrainConfig stepped_config(const CircuitParams& p) {
  auto cfg = TrainConfig::defaults(p);
  cfg.v = stepped_reference();
  return cfg;
}

}  // namespace

TEST_CASE("linear gains") {
  const auto g = FeedbackGains::published();
  CHECK(evaluate_gains(g, 0.1, 0.0, 0.0) == doctest::Approx(-0.06176).epsilon(1e-14));
  CHECK(evaluate_gains(g, 0.0, 0.0, 1.0) == 1.8195);
  CHECK(evaluate_gains(g, 0.0, 0.0, 0.0) == 0.0);
  CHECK(evaluate_gains({1, 2, 3}, 1, 1, 1) == 6.0);
  CHECK(FeedbackGains::decode(g.encode()).k2 == 0.0410);
  CHECK_THROWS_AS(FeedbackGains::decode(std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("train config defaults") {
  const auto p = CircuitParams::reference();
  const auto cfg = TrainConfig::defaults(p);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.n_samples == 1000);
  CHECK(cfg.tau == 1.0);
  CHECK(cfg.u_max == doctest::Approx(0.19));
  auto bad = cfg;
  bad.u_max = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("controller family") {
  CHECK(ControllerFamily::neural(8).flat_size() == 32);
  CHECK(ControllerFamily::linear_gains().flat_size() == 3);
  CHECK_THROWS_AS(ControllerFamily::neural(8).make(std::vector<double>(3)), std::invalid_argument);
  const auto c = ControllerFamily::linear_gains().make(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(c({0.1, 0.2}, 0.3) == doctest::Approx(1.4));
}

TEST_CASE("performance index") {
  const auto p = CircuitParams::reference();

  SUBCASE("resting plant against a zero reference") {
    auto cfg = TrainConfig::defaults(p);
    cfg.v = DriveSignal::constant(0.0);
    CHECK(performance_index(p, cfg, [](const State&, double) { return 0.0; }) == 0.0);
  }

  SUBCASE("zero controller on the stepped reference scores sum y_d^2") {
    const auto cfg = stepped_config(p);
    const TrackingObjective J(p, cfg);
    double expected = 0.0;
    for (double y : J.reference()) expected += y * y;
    CHECK(J([](const State&, double) { return 0.0; }) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(J.reference().size() == 1001);
    CHECK(expected > 0.05);
  }

  SUBCASE("published controllers are bounded and score small J") {
    const auto cfg = stepped_config(p);
    const TrackingObjective J(p, cfg);
    for (const auto& [fam, params] :
         {std::pair{ControllerFamily::neural(8), load_table1().encode()},
          std::pair{ControllerFamily::linear_gains(), FeedbackGains::published().encode()}}) {
      const auto r = J.rollout(fam.make(params));
      CHECK_FALSE(r.truncated);
      for (double u : r.trajectory.u) CHECK(std::abs(u) <= cfg.u_max);
      CHECK(r.J < 0.2);
    }
  }

  SUBCASE("saturation is applied inside the rollout") {
    const auto cfg = stepped_config(p);
    const auto r = TrackingObjective(p, cfg).rollout([](const State&, double v) { return 100.0 * v; });
    for (double u : r.trajectory.u) CHECK(std::abs(u) <= cfg.u_max);
  }

  SUBCASE("truncated runs pay per missing sample") {
    auto cfg = stepped_config(p);
    cfg.u_max = 10.0;
    const TrackingObjective J(p, cfg);
    const auto r = J.rollout([](const State&, double) { return 0.5; });
    REQUIRE(r.truncated);
    double partial = 0.0;
    for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
      partial += (r.y_d[k] - r.trajectory.y[k]) * (r.y_d[k] - r.trajectory.y[k]);
    }
    double peak = 0.0;
    for (double y : r.y_d) peak = std::max(peak, y);
    CHECK(J.penalty_per_missing_step() == doctest::Approx(10.0 * peak * peak));
    const double missing = static_cast<double>(1001 - r.trajectory.size());
    CHECK(r.J == doctest::Approx(partial + 10.0 * peak * peak * missing).epsilon(1e-12));
  }
}

TEST_CASE("linear state feedback cannot cancel the output nonlinearity") {
  const auto p = CircuitParams::reference();
  const auto g = FeedbackGains::published();
  const double tau = 1.0, v = 0.02;
  // Residual ydot + tau y - v under the linear law at probe states with x1^3 x2 != 0.
  for (const State s : {State{0.1, 0.3}, State{-0.15, 0.05}, State{0.05, -1.0}}) {
    const double u = evaluate_gains(g, s.x1, s.x2, v);
    const double residual = output_rate(p, s, u) + tau * output_energy(p, s) - v;
    CHECK(std::abs(residual) > 1e-4);
  }
}

TEST_CASE("hill climbing") {
  const auto p = CircuitParams::reference();

  SUBCASE("flat objective at the optimum leaves init unchanged") {
    auto cfg = TrainConfig::defaults(p);
    cfg.v = DriveSignal::constant(0.0);
    cfg.max_evals = 300;
    const std::vector<double> init{0.3, -0.2, 0.9};
    const auto res = train(p, cfg, ControllerFamily::linear_gains(), init);
    CHECK(res.best == init);
    CHECK(res.J_best == 0.0);
    CHECK(res.log.size() == 300);
    CHECK(res.final_step_scale == doctest::Approx(cfg.step_scale / 2));
  }

  SUBCASE("best-so-far is monotone and reproducible") {
    auto cfg = stepped_config(p);
    cfg.max_evals = 400;
    cfg.step_scale = 0.3;
    cfg.seed = 9;
    const auto init = random_init(ControllerFamily::neural(8), cfg.seed);
    const auto a = train(p, cfg, ControllerFamily::neural(8), init);
    const auto b = train(p, cfg, ControllerFamily::neural(8), init);
    CHECK(a.best == b.best);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
      CHECK(a.log[i].J_candidate == b.log[i].J_candidate);
      if (i) CHECK(a.log[i].J_best <= a.log[i - 1].J_best);
      CHECK(a.log[i].J_best <= a.log[i].J_candidate);
      CHECK(a.log[i].eval == i + 1);
    }
    CHECK(a.J_best <= a.J_init);
    CHECK(a.J_best == a.log.back().J_best);

    cfg.seed = 10;
    CHECK(train(p, cfg, ControllerFamily::neural(8), init).best != a.best);
  }

  SUBCASE("starting from the published gains does not get worse") {
    auto cfg = stepped_config(p);
    cfg.max_evals = 300;
    const auto init = FeedbackGains::published().encode();
    const auto res = train(p, cfg, ControllerFamily::linear_gains(), init);
    CHECK(res.J_best <= res.J_init);
    CHECK(res.J_init == doctest::Approx(TrackingObjective(p, cfg)(ControllerFamily::linear_gains().make(init))));
  }

  SUBCASE("init length must match") {
    CHECK_THROWS_AS(train(p, TrainConfig::defaults(p), ControllerFamily::neural(8), std::vector<double>(3)),
                    std::invalid_argument);
  }

  SUBCASE("random init is uniform in [-1, 1] and seeded") {
    const auto a = random_init(ControllerFamily::neural(8), 4);
    CHECK(a == random_init(ControllerFamily::neural(8), 4));
    CHECK(a != random_init(ControllerFamily::neural(8), 5));
    for (double x : a) CHECK(std::abs(x) <= 1.0);
  }
}
