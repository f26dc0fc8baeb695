#pragma once

#include <utility>

#include "jjosc/errors.hpp"

namespace jjosc {

/// Physical constants of the parallel LC circuit with a Josephson junction
/// as the inductor. L0 is always derived as kappa / I0.
class CircuitParams {
 public:
  /// Throws DomainError unless I0, kappa and C0 are all strictly positive.
  CircuitParams(double I0, double kappa, double C0);

  double I0() const noexcept { return i0_; }
  double kappa() const noexcept { return kappa_; }
  double C0() const noexcept { return c0_; }
  double L0() const noexcept { return l0_; }

  /// Coefficient of x1^2 L^2(x1) in dh/dx1: 1 / (2 I0^2 L0^2).
  double gamma() const noexcept { return gamma_; }

  /// Largest |x1| accepted by the model: I0 (1 - 1e-12).
  double admissible_limit() const noexcept { return limit_; }
  bool admissible(double x1) const noexcept;

  /// Parameters used for every simulation in the reference experiments:
  /// I0 = 0.2 A, kappa = 1, C0 = 0.1 F.
  static CircuitParams reference() { return {0.2, 1.0, 0.1}; }

 private:
  double i0_;
  double kappa_;
  double c0_;
  double l0_;
  double gamma_;
  double limit_;
};

/// x1 is the junction (inductor) current, x2 the capacitor voltage.
struct State {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

struct StateRate {
  double dx1 = 0.0;
  double dx2 = 0.0;
};

struct OutputGradient {
  double dx1 = 0.0;
  double dx2 = 0.0;
};

/// Relative margin below I0 at which the model stops accepting currents.
inline constexpr double kCriticalMargin = 1e-12;

/// L(x1) = L0 / sqrt(1 - (x1/I0)^2). Throws DomainError when x1 is not
/// admissible.
double inductance(const CircuitParams& p, double x1);

/// Right-hand side of the state equations under the source current u.
StateRate dynamics(const CircuitParams& p, const State& s, double u);

/// Stored energy h(x) = L(x1) x1^2 / 2 + C0 x2^2 / 2, the plant output y.
double output_energy(const CircuitParams& p, const State& s);

/// Exact partial derivatives of output_energy.
///
/// dh/dx1 = x1 L(x1) [1 + gamma x1^2 L^2(x1)], dh/dx2 = C0 x2.
OutputGradient output_gradient(const CircuitParams& p, const State& s);

/// Throws DomainError if the state is outside the admissible region.
void require_admissible(const CircuitParams& p, const State& s);

}  // namespace jjosc
