#include "jjosc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace jjosc {

PiecewiseConstant::PiecewiseConstant(std::vector<Breakpoint> breakpoints)
    : bps_(std::move(breakpoints)) {
  if (bps_.empty()) throw ConfigError("piecewise signal needs at least one breakpoint");
  if (bps_.front().t_start != 0.0) {
    throw ConfigError("piecewise signal must start at t = 0");
  }
  for (std::size_t i = 1; i < bps_.size(); ++i) {
    if (!(bps_[i].t_start > bps_[i - 1].t_start)) {
      throw ConfigError("piecewise breakpoints must be strictly increasing");
    }
  }
}

double PiecewiseConstant::operator()(double t) const {
  auto it = std::upper_bound(bps_.begin(), bps_.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t_start; });
  if (it == bps_.begin()) return bps_.front().level;
  return std::prev(it)->level;
}

double DriveSignal::operator()(double t) const {
  return std::visit(
      [t](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BiasSine>) {
          return s.a1 == 0.0 ? s.a0 : s.a0 + s.a1 * std::sin(s.omega * t);
        } else {
          return s(t);
        }
      },
      sig_);
}

double DriveSignal::peak() const {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BiasSine>) {
          return std::abs(s.a0) + std::abs(s.a1);
        } else {
          double m = 0.0;
          for (const auto& b : s.breakpoints()) m = std::max(m, std::abs(b.level));
          return m;
        }
      },
      sig_);
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
}

void Trajectory::reserve(std::size_t n) {
  for (auto* v : {&t, &x1, &x2, &u, &this->v, &y}) v->reserve(n);
}

void Trajectory::push(double tk, const State& s, double uk, double vk, double yk) {
  t.push_back(tk);
  x1.push_back(s.x1);
  x2.push_back(s.x2);
  u.push_back(uk);
  v.push_back(vk);
  y.push_back(yk);
}

namespace {

State rk4_step(const CircuitParams& p, const State& s, double u, double dt) {
  const StateRate k1 = dynamics(p, s, u);
  const StateRate k2 = dynamics(p, {s.x1 + 0.5 * dt * k1.dx1, s.x2 + 0.5 * dt * k1.dx2}, u);
  const StateRate k3 = dynamics(p, {s.x1 + 0.5 * dt * k2.dx1, s.x2 + 0.5 * dt * k2.dx2}, u);
  const StateRate k4 = dynamics(p, {s.x1 + dt * k3.dx1, s.x2 + dt * k3.dx2}, u);
  return {s.x1 + dt / 6.0 * (k1.dx1 + 2.0 * k2.dx1 + 2.0 * k3.dx1 + k4.dx1),
          s.x2 + dt / 6.0 * (k1.dx2 + 2.0 * k2.dx2 + 2.0 * k3.dx2 + k4.dx2)};
}

Vector2 linear_rate(const Matrix2& A, const Vector2& B, const Vector2& z, double u) {
  return {A[0][0] * z[0] + A[0][1] * z[1] + B[0] * u,
          A[1][0] * z[0] + A[1][1] * z[1] + B[1] * u};
}

}  // namespace

Trajectory simulate_nonlinear(const CircuitParams& p, const SimConfig& cfg,
                              const DriveSignal& drive, const Controller& controller) {
  cfg.validate();
  require_admissible(p, cfg.x0);

  Trajectory traj;
  traj.reserve(cfg.n_samples + 1);
  State s = cfg.x0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double v = drive(t);
    double u = v;
    if (controller) {
      try {
        u = controller(s, v);
      } catch (const SingularityError& e) {
        throw TrajectoryTruncated(std::move(traj),
                                  TrajectoryTruncated::Cause::ControllerSingular,
                                  "controller singular at t = " + std::to_string(t) +
                                      " s: " + e.what());
      }
    }
    traj.push(t, s, u, v, output_energy(p, s));
    if (k == cfg.n_samples) break;

    try {
      s = rk4_step(p, s, u, cfg.dt);
      require_admissible(p, s);
    } catch (const DomainError& e) {
      throw TrajectoryTruncated(std::move(traj),
                                TrajectoryTruncated::Cause::LeftAdmissibleRegion,
                                "trajectory left the admissible region after t = " +
                                    std::to_string(t) + " s: " + e.what());
    }
  }
  return traj;
}

Trajectory simulate_linear(const Matrix2& A, const Vector2& B, const SimConfig& cfg,
                           const DriveSignal& drive) {
  cfg.validate();
  Trajectory traj;
  traj.reserve(cfg.n_samples + 1);
  Vector2 z{cfg.x0.x1, cfg.x0.x2};
  const double dt = cfg.dt;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double u = drive(t);
    traj.push(t, {z[0], z[1]}, u, u, 0.0);
    if (k == cfg.n_samples) break;

    const Vector2 k1 = linear_rate(A, B, z, u);
    const Vector2 k2 = linear_rate(A, B, {z[0] + 0.5 * dt * k1[0], z[1] + 0.5 * dt * k1[1]}, u);
    const Vector2 k3 = linear_rate(A, B, {z[0] + 0.5 * dt * k2[0], z[1] + 0.5 * dt * k2[1]}, u);
    const Vector2 k4 = linear_rate(A, B, {z[0] + dt * k3[0], z[1] + dt * k3[1]}, u);
    for (int i = 0; i < 2; ++i) {
      z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return traj;
}

std::optional<double> estimate_angular_frequency(std::span<const double> signal, double dt,
                                                 double skip_fraction) {
  const auto first = static_cast<std::size_t>(skip_fraction * static_cast<double>(signal.size()));
  if (signal.size() < first + 3) return std::nullopt;
  const auto tail = signal.subspan(first);
  const double mean =
      std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());

  std::vector<double> crossings;
  for (std::size_t i = 1; i < tail.size(); ++i) {
    const double a = tail[i - 1] - mean;
    const double b = tail[i] - mean;
    if (a < 0.0 && b >= 0.0) {
      crossings.push_back((static_cast<double>(i - 1) + a / (a - b)) * dt);
    }
  }
  if (crossings.size() < 2) return std::nullopt;
  const double period =
      (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  return 2.0 * std::numbers::pi / period;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const CsvColumn cols[] = {{"t", &traj.t}, {"x1", &traj.x1}, {"x2", &traj.x2},
                            {"u", &traj.u}, {"y", &traj.y}};
  write_csv(os, cols);
}

}  // namespace jjosc
