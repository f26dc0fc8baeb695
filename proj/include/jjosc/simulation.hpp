#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "jjosc/circuit.hpp"
#include "jjosc/csv.hpp"

namespace jjosc {

/// u(t) = a0 + a1 sin(omega t). With a1 = 0 this is the constant bias a0.
struct BiasSine {
  double a0 = 0.0;
  double a1 = 0.0;
  double omega = 0.0;
};

/// One (start time, level) pair of a stepped signal.
struct Breakpoint {
  double t_start = 0.0;
  double level = 0.0;
};

/// Stepped signal: level of the last breakpoint whose start is <= t.
class PiecewiseConstant {
 public:
  /// Breakpoints must be non-empty, strictly increasing and start at t = 0.
  explicit PiecewiseConstant(std::vector<Breakpoint> breakpoints);

  double operator()(double t) const;
  const std::vector<Breakpoint>& breakpoints() const noexcept { return bps_; }

 private:
  std::vector<Breakpoint> bps_;
};

/// Source current u(t) for open-loop runs, or the external reference v(t)
/// when a controller closes the loop.
class DriveSignal {
 public:
  DriveSignal() = default;
  DriveSignal(BiasSine s) : sig_(s) {}  // NOLINT(google-explicit-constructor)
  DriveSignal(PiecewiseConstant s)      // NOLINT(google-explicit-constructor)
      : sig_(std::move(s)) {}

  static DriveSignal constant(double level) { return BiasSine{level, 0.0, 0.0}; }

  double operator()(double t) const;

  /// Largest |value| the signal can take.
  double peak() const;

  const std::variant<BiasSine, PiecewiseConstant>& variant() const noexcept {
    return sig_;
  }

 private:
  std::variant<BiasSine, PiecewiseConstant> sig_{BiasSine{}};
};

struct SimConfig {
  double dt = 0.01;
  std::size_t n_samples = 2000;
  State x0{};

  /// Throws ConfigError unless dt > 0 and n_samples >= 1.
  void validate() const;
};

/// Sampled run of length n_samples + 1. t[k] is always k * dt.
///
/// `u` is the input applied over [t_k, t_k+1) (zero-order hold), `v` the
/// value of the drive signal at t_k (equal to `u` in open loop). For linear
/// runs x1/x2 hold the deviation state and `y` is zero-filled.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> y;

  std::size_t size() const noexcept { return t.size(); }
  bool empty() const noexcept { return t.empty(); }
  void reserve(std::size_t n);
  void push(double tk, const State& s, double uk, double vk, double yk);
  State state(std::size_t k) const { return {x1[k], x2[k]}; }
};

/// A closed-loop or open-loop run stopped before n_samples. Carries the
/// samples recorded up to the failure.
class TrajectoryTruncated : public std::runtime_error {
 public:
  enum class Cause { LeftAdmissibleRegion, ControllerSingular };

  TrajectoryTruncated(Trajectory partial, Cause cause, const std::string& what)
      : std::runtime_error(what), partial_(std::move(partial)), cause_(cause) {}

  const Trajectory& partial() const noexcept { return partial_; }
  Cause cause() const noexcept { return cause_; }

 private:
  Trajectory partial_;
  Cause cause_;
};

/// State feedback u = f(x, v) where v is the drive value at the step start.
using Controller = std::function<double(const State&, double v)>;

/// Fixed-step classical RK4 on the nonlinear plant with the input held
/// constant over each step.
///
/// Without a controller the drive is applied directly as u(t). With one, the
/// drive is the reference v(t) and u = controller(x_k, v(t_k)).
/// Throws TrajectoryTruncated when x1 leaves the admissible region (including
/// at an RK4 stage) or the controller reports a SingularityError.
Trajectory simulate_nonlinear(const CircuitParams& p, const SimConfig& cfg,
                              const DriveSignal& drive,
                              const Controller& controller = {});

using Matrix2 = std::array<std::array<double, 2>, 2>;
using Vector2 = std::array<double, 2>;

/// Same integrator applied to zdot = A z + B u.
Trajectory simulate_linear(const Matrix2& A, const Vector2& B, const SimConfig& cfg,
                           const DriveSignal& drive);

/// Angular frequency of a near-sinusoidal sampled signal from the mean
/// spacing of its upward mean crossings. The first `skip_fraction` of the
/// samples is discarded. Returns nullopt with fewer than two crossings.
std::optional<double> estimate_angular_frequency(std::span<const double> signal,
                                                 double dt,
                                                 double skip_fraction = 0.25);

/// `t,x1,x2,u,y`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace jjosc
