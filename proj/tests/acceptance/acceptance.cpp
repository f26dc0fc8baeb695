// One line per acceptance criterion; exit status is non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "jjosc/circuit.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/feedback_linearization.hpp"
#include "jjosc/neural_controller.hpp"
#include "jjosc/scenario.hpp"
#include "jjosc/simulation.hpp"
#include "jjosc/taylor.hpp"
#include "jjosc/trainer.hpp"

using namespace jjosc;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(JJOSC_SOURCE_DIR) / "scenarios";
int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %2d %-28s %s (%.2f s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class F>
void criterion(int id, const char* name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  report(id, name, pass, detail, dt.count());
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double nonlinear_frequency(const Scenario& sc) {
  const auto tr = simulate_nonlinear(sc.circuit, sc.sim, sc.drive);
  return estimate_angular_frequency(tr.x1, sc.sim.dt).value_or(0.0);
}

double rk4_error(double dt) {
  const Matrix2 A{{{0.0, 0.2}, {-10.0, 0.0}}};
  const Vector2 B{0.0, -10.0};
  const SimConfig cfg{dt, static_cast<std::size_t>(std::lround(20.0 / dt)), {0.01, 0.0}};
  const auto tr = simulate_linear(A, B, cfg, DriveSignal::constant(0.0));
  const double w = std::sqrt(2.0);
  double e = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double z1 = 0.01 * std::cos(w * tr.t[k]);
    const double z2 = -0.01 * w * std::sin(w * tr.t[k]) / 0.2;
    e = std::max(e, std::hypot(tr.x1[k] - z1, tr.x2[k] - z2));
  }
  return e;
}

TrainResult train_bundled(const char* file) {
  const auto sc = load_scenario(kScenarios / file);
  return train(sc.circuit, sc.train, sc.controller, sc.init);
}

bool monotone(const TrainResult& r) {
  for (std::size_t i = 1; i < r.log.size(); ++i) {
    if (r.log[i].J_best > r.log[i - 1].J_best) return false;
  }
  return true;
}

double J_nn = NAN;

}  // namespace

int main() {
  const auto p = CircuitParams::reference();

  criterion(1, "equilibrium", [&](std::string& d) {
    bool ok = true;
    for (double u : {0.05, 0.1}) {
      const State e = equilibrium(p, u);
      ok = ok && e.x1 == -u && e.x2 == 0.0;
    }
    d = "(-u, 0) exact for u in {0.05, 0.1}";
    return ok;
  });

  criterion(2, "natural frequency", [&](std::string& d) {
    // Closed-form values (L0 = 5, C0 = 0.1) evaluated in extended precision.
    const double w05 = natural_frequency(p, -0.05), w10 = natural_frequency(p, -0.1);
    const bool formula = std::abs(w05 - 1.3915788418568703) <= 1e-6 && std::abs(w10 - 1.3160740129524925) <= 1e-6;
    bool measured = true;
    std::string m;
    for (double xb : {-0.05, -0.1}) {
      const auto lin = linearize(p, -xb);
      const SimConfig cfg{0.01, 2000, {0.01, 0.0}};
      const auto tr = simulate_linear(lin.A, lin.B, cfg, DriveSignal::constant(0.0));
      const double w = estimate_angular_frequency(tr.x1, cfg.dt).value_or(0.0);
      measured = measured && std::abs(w / lin.omega0 - 1.0) < 0.01;
      m += fmt(" meas=%.6f", w);
    }
    d = fmt("w0(-0.05)=%.9f w0(-0.1)=%.9f", w05, w10) + m;
    return formula && measured;
  });

  criterion(3, "frequency reduction", [&](std::string& d) {
    const double w05 = nonlinear_frequency(load_scenario(kScenarios / "fig2.scn"));
    const double w10 = nonlinear_frequency(load_scenario(kScenarios / "fig4.scn"));
    d = fmt("w(u=0.05)=%.5f w(u=0.1)=%.5f", w05, w10);
    return w10 > 0.0 && w10 < w05;
  });

  criterion(4, "gradient oracle", [&](std::string& d) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d1(-0.99 * p.I0(), 0.99 * p.I0()), d2(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const State s{d1(rng), d2(rng)};
      const auto g = output_gradient(p, s);
      const double h1 = 1e-6 * p.I0(), h2 = 1e-6;
      const double f1 = (output_energy(p, {s.x1 + h1, s.x2}) - output_energy(p, {s.x1 - h1, s.x2})) / (2 * h1);
      const double f2 = (output_energy(p, {s.x1, s.x2 + h2}) - output_energy(p, {s.x1, s.x2 - h2})) / (2 * h2);
      worst = std::max(worst, std::abs(g.dx1 - f1) / std::max(std::abs(f1), 1e-4));
      worst = std::max(worst, std::abs(g.dx2 - f2) / std::max(std::abs(f2), 1e-4));
    }
    d = fmt("max rel err %.2e over 1000 states", worst);
    return worst <= 1e-6;
  });

  criterion(5, "exact linearization", [&](std::string& d) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d1(-0.99 * p.I0(), 0.99 * p.I0()), d2(-2.0, 2.0), dv(-0.2, 0.2),
        dt(0.1, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 1000;) {
      const State s{d1(rng), d2(rng)};
      if (std::abs(s.x2) <= 1e-3) continue;
      const double v = dv(rng), tau = dt(rng);
      const double lhs = output_rate(p, s, exact_control(p, s, v, tau));
      const double rhs = -tau * output_energy(p, s) + v;
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
      ++i;
    }
    const auto sc = load_scenario(kScenarios / "exact-fl.scn");
    const auto run = run_exact_fl(sc.circuit, sc.sim, sc.reference, sc.drive);
    bool singular = false;
    try {
      exact_control(p, {0.05, 0.0}, 0.01, 1.0);
    } catch (const SingularityError&) {
      singular = true;
    }
    d = fmt("identity rel %.1e; closed loop max|y-y_d| %.2e; x2=0 %s", worst, run.max_tracking_error,
            singular ? "raises" : "no error");
    return worst <= 1e-12 && run.max_tracking_error <= 1e-4 && singular;
  });

  criterion(6, "RK4 order", [&](std::string& d) {
    const double e1 = rk4_error(0.1), e2 = rk4_error(0.05);
    d = fmt("err %.3e -> %.3e, ratio %.2f", e1, e2, e1 / e2);
    return e1 / e2 >= 12.0 && e1 / e2 <= 20.0;
  });

  criterion(7, "Taylor proximity ordering", [&](std::string& d) {
    const auto a = load_scenario(kScenarios / "fig2.scn");
    const auto b = load_scenario(kScenarios / "fig4.scn");
    const double e05 = taylor_compare(a.circuit, a.sim, std::get<BiasSine>(a.drive.variant())).max_current_error();
    const double e10 = taylor_compare(b.circuit, b.sim, std::get<BiasSine>(b.drive.variant())).max_current_error();
    d = fmt("max|x1-x1_lin| u=0.05: %.3e  u=0.1: %.3e", e05, e10);
    return e10 > e05;
  });

  criterion(8, "Table 1 regression", [&](std::string& d) {
    struct Probe {
      double x1, x2, v, u;
    };
    const Probe probes[] = {
        {0.0, 0.0, 0.0, 0.0},
        {0.1, 0.0, 0.0, 0.043053323315804547},
        {0.0, 0.1, 0.0, 0.030360221324074102},
        {0.0, 0.0, 0.1, 0.74372498815033535},
        {-0.05, 0.2, 0.01, 0.10897874822714913},
        {0.15, -0.3, 0.02, 0.15415363604043381},
        {-0.12, -0.05, 0.0244, 0.1142257853457156},
        {0.03, 0.5, -0.01, 0.153019258977637},
        {0.19, 1.0, 0.1, 1.3659835262480561},
        {-0.19, -1.0, -0.1, -1.3659835262480561},
    };
    const auto net = load_table1();
    double worst = 0.0;
    for (const auto& pr : probes) worst = std::max(worst, std::abs(forward(net, pr.x1, pr.x2, pr.v) - pr.u));
    const bool origin = forward(net, 0.0, 0.0, 0.0) == 0.0;
    d = fmt("max abs dev %.1e at 10 probes; forward(0,0,0)=%s", worst, origin ? "0" : "nonzero");
    return worst <= 1e-12 && origin;
  });

  criterion(9, "linear gains", [&](std::string& d) {
    const auto g = FeedbackGains::published();
    const bool probes = evaluate_gains(g, 0.1, 0.0, 0.0) == -0.6176 * 0.1 && evaluate_gains(g, 0.0, 1.0, 0.0) == 0.0410 &&
                        evaluate_gains(g, 0.0, 0.0, 1.0) == 1.8195 &&
                        evaluate_gains(g, 0.1, 0.2, 0.03) == -0.6176 * 0.1 + 0.0410 * 0.2 + 1.8195 * 0.03;
    // Unsaturated: the bound has to come from the gains themselves.
    const auto sc = load_scenario(kScenarios / "gains-replay.scn");
    const auto tr = simulate_nonlinear(sc.circuit, sc.sim, sc.drive, sc.controller.make(sc.controller_params));
    double peak = 0.0;
    for (double u : tr.u) peak = std::max(peak, std::abs(u));
    d = fmt("probes %s; closed loop max|u| = %.4f over %zu steps (I0 = %.2f)", probes ? "exact" : "mismatch", peak,
            tr.size(), sc.circuit.I0());
    return probes && peak < sc.circuit.I0();
  });

  criterion(10, "training NN(3,8,1)", [&](std::string& d) {
    const auto r = train_bundled("fig9.scn");
    J_nn = r.J_best;
    d = fmt("J %.5f -> %.5f in %zu evals, monotone %s", r.J_init, r.J_best, r.log.size(), monotone(r) ? "yes" : "no");
    return r.J_best < 0.05 && r.log.size() <= 20000 && monotone(r);
  });

  criterion(11, "training linear gains", [&](std::string& d) {
    const auto r = train_bundled("fig12.scn");
    d = fmt("J %.5f -> %.5f in %zu evals, monotone %s; J(linear)=%.5f J(NN)=%.5f", r.J_init, r.J_best, r.log.size(),
            monotone(r) ? "yes" : "no", r.J_best, J_nn);
    return r.J_best < 0.05 && r.log.size() <= 2000 && monotone(r);
  });

  criterion(12, "determinism", [&](std::string& d) {
    const auto root = fs::temp_directory_path() / "jjosc_acceptance";
    fs::remove_all(root);
    std::size_t scenarios = 0, files = 0;
    bool same = true;
    std::string bad;
    for (const auto& entry : fs::directory_iterator(kScenarios)) {
      if (entry.path().extension() != ".scn") continue;
      ++scenarios;
      const auto a = run_scenario(entry.path(), {.output_dir = root / "a"});
      const auto b = run_scenario(entry.path(), {.output_dir = root / "b"});
      if (a.exit_code != 0 || b.exit_code != 0 || a.files.size() != b.files.size()) {
        same = false;
        bad += " " + entry.path().filename().string();
        continue;
      }
      for (std::size_t i = 0; i < a.files.size(); ++i) {
        ++files;
        if (slurp(a.files[i]) != slurp(b.files[i])) {
          same = false;
          bad += " " + a.files[i].filename().string();
        }
      }
    }
    fs::remove_all(root);
    d = fmt("%zu scenarios, %zu files compared", scenarios, files) + (same ? "" : "; differ:" + bad);
    return same && scenarios > 0;
  });

  std::printf("%s: %d of 12 criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
