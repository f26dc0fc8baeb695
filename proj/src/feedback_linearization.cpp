#include "jjosc/feedback_linearization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jjosc {

void ReferenceModel::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
}

std::vector<double> reference_response(double tau, double y_d0, double dt,
                                       std::span<const double> v) {
  std::vector<double> out;
  if (v.empty()) return out;
  out.reserve(v.size());
  const double decay = std::exp(-tau * dt);
  const double gain = -std::expm1(-tau * dt) / tau;
  double y = y_d0;
  out.push_back(y);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    y = decay * y + gain * v[k];
    out.push_back(y);
  }
  return out;
}

double output_rate(const CircuitParams& p, const State& s, double u) {
  const double L = inductance(p, s.x1);
  return p.gamma() * s.x1 * s.x1 * s.x1 * s.x2 * L * L - s.x2 * u;
}

double exact_control(const CircuitParams& p, const State& s, double v, double tau) {
  if (!(std::abs(s.x2) > kSingularityGuard)) {
    throw SingularityError("exact linearizing control undefined at x2 = " +
                           std::to_string(s.x2) + " V");
  }
  const double L = inductance(p, s.x1);
  const double y = output_energy(p, s);
  return (tau * y - v + p.gamma() * s.x1 * s.x1 * s.x1 * s.x2 * L * L) / s.x2;
}

ExactFlRun run_exact_fl(const CircuitParams& p, const SimConfig& cfg, const ReferenceModel& ref,
                        const DriveSignal& v) {
  ref.validate();
  const double tau = ref.tau;
  const Controller law = [&p, tau](const State& s, double vk) {
    return exact_control(p, s, vk, tau);
  };

  ExactFlRun run;
  run.trajectory = simulate_nonlinear(p, cfg, v, law);
  const double y_d0 = ref.y_d0.value_or(output_energy(p, cfg.x0));
  run.y_d = reference_response(tau, y_d0, cfg.dt, run.trajectory.v);
  for (std::size_t k = 0; k < run.y_d.size(); ++k) {
    run.max_tracking_error =
        std::max(run.max_tracking_error, std::abs(run.trajectory.y[k] - run.y_d[k]));
  }
  return run;
}

}  // namespace jjosc
