#pragma once

#include <span>
#include <utility>
#include <vector>

#include "jjosc/circuit.hpp"
#include "jjosc/simulation.hpp"

namespace jjosc {

/// Jacobian linearization of the circuit about (x_bar1, x_bar2, u_bar).
///
/// The linear state z is the deviation from equilibrium and the linear input
/// is the deviation of u from u_bar.
struct LinearizedModel {
  double x_bar1 = 0.0;
  double x_bar2 = 0.0;
  double u_bar = 0.0;
  Matrix2 A{};
  Vector2 B{};
  double c11 = 0.0;
  double c12 = 0.0;
  double omega0 = 0.0;
  double k0 = 0.0;
  /// L(x_bar1), frozen for the nonlinear output of the linear model.
  double L_bar = 0.0;
};

/// (-u_bar, 0). Throws DomainError when |u_bar| is not below I0.
State equilibrium(const CircuitParams& p, double u_bar);

LinearizedModel linearize(const CircuitParams& p, double u_bar);

/// omega0 = (L0 C0)^(-1/2) (1 - (x_bar1/I0)^2)^(1/4).
double natural_frequency(const CircuitParams& p, double x_bar1);

struct FrequencyPoint {
  double x_bar1;
  double omega0;
};

std::vector<FrequencyPoint> natural_frequency_curve(const CircuitParams& p,
                                                    std::span<const double> x_bar1_grid);

struct LinearOutputs {
  double y0 = 0.0;  ///< c11 z1 + c12 z2
  double yl = 0.0;  ///< L(x_bar1) z1^2 / 2 + C0 z2^2 / 2
};

/// y_l freezes the inductance at the operating point, so z1 is unrestricted.
LinearOutputs linearized_outputs(const LinearizedModel& m, const CircuitParams& p,
                                 double z1, double z2);

/// |k0| / |omega0^2 - omega^2|. Throws ResonanceError at omega == omega0 and
/// DomainError for negative omega.
double magnitude_response(const LinearizedModel& m, double omega);

/// Nonlinear run next to its linearization about the drive's bias a0.
struct TaylorComparison {
  LinearizedModel model;
  Trajectory nonlinear;
  Trajectory linear;  ///< deviation states z1, z2
  std::vector<double> y0;
  std::vector<double> yl;

  /// max_k |x1[k] - (x_bar1 + z1[k])|
  double max_current_error() const;
};

/// The nonlinear plant starts at cfg.x0 and is driven by `drive`; the linear
/// model starts at cfg.x0 - equilibrium and is driven by drive - a0.
/// A truncated nonlinear run propagates as TrajectoryTruncated.
TaylorComparison taylor_compare(const CircuitParams& p, const SimConfig& cfg,
                                const BiasSine& drive);

}  // namespace jjosc
