#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jjosc/circuit.hpp"
#include "jjosc/simulation.hpp"

namespace jjosc {

/// First-order target dynamics ydot + tau y = v, sampled with an exact
/// zero-order-hold recursion.
struct ReferenceModel {
  double tau = 1.0;
  /// Initial value; when unset, runners use the plant output at x0.
  std::optional<double> y_d0;

  /// Throws ConfigError unless tau > 0.
  void validate() const;
};

/// y_d[k+1] = e^(-tau dt) y_d[k] + (1 - e^(-tau dt)) v[k] / tau for the held
/// input samples `v`. Returns as many samples as `v` has, starting at y_d0.
std::vector<double> reference_response(double tau, double y_d0, double dt,
                                       std::span<const double> v);

/// Guard on |x2| below which the exact control law is rejected [V].
inline constexpr double kSingularityGuard = 1e-6;

/// ydot = gamma x1^3 x2 L^2(x1) - x2 u, the output derivative along the plant
/// dynamics.
double output_rate(const CircuitParams& p, const State& s, double u);

/// u = (tau y - v + gamma x1^3 x2 L^2(x1)) / x2, which makes ydot = -tau y + v.
/// Throws SingularityError when |x2| <= kSingularityGuard.
double exact_control(const CircuitParams& p, const State& s, double v, double tau);

struct ExactFlRun {
  Trajectory trajectory;
  std::vector<double> y_d;
  double max_tracking_error = 0.0;
};

/// Closed loop under exact_control with the reference recursion alongside.
/// A singular state mid-run throws TrajectoryTruncated carrying the partial
/// trajectory; the reference for it can be rebuilt with reference_response.
ExactFlRun run_exact_fl(const CircuitParams& p, const SimConfig& cfg,
                        const ReferenceModel& ref, const DriveSignal& v);

}  // namespace jjosc
