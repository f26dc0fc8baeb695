#include "jjosc/circuit.hpp"

#include <cmath>
#include <string>

namespace jjosc {

CircuitParams::CircuitParams(double I0, double kappa, double C0)
    : i0_(I0), kappa_(kappa), c0_(C0) {
  if (!(I0 > 0.0) || !(kappa > 0.0) || !(C0 > 0.0)) {
    throw DomainError("circuit parameters I0, kappa and C0 must be positive");
  }
  l0_ = kappa_ / i0_;
  gamma_ = 1.0 / (2.0 * i0_ * i0_ * l0_ * l0_);
  limit_ = i0_ * (1.0 - kCriticalMargin);
}

bool CircuitParams::admissible(double x1) const noexcept {
  return std::abs(x1) < limit_;
}

void require_admissible(const CircuitParams& p, const State& s) {
  if (!p.admissible(s.x1) || !std::isfinite(s.x2)) {
    throw DomainError("junction current " + std::to_string(s.x1) +
                      " A is at or beyond the critical current " +
                      std::to_string(p.I0()) + " A");
  }
}

double inductance(const CircuitParams& p, double x1) {
  if (!p.admissible(x1)) {
    throw DomainError("junction current " + std::to_string(x1) +
                      " A is at or beyond the critical current " +
                      std::to_string(p.I0()) + " A");
  }
  const double r = x1 / p.I0();
  return p.L0() / std::sqrt(1.0 - r * r);
}

StateRate dynamics(const CircuitParams& p, const State& s, double u) {
  const double L = inductance(p, s.x1);
  return {s.x2 / L, -(s.x1 + u) / p.C0()};
}

double output_energy(const CircuitParams& p, const State& s) {
  const double L = inductance(p, s.x1);
  return 0.5 * L * s.x1 * s.x1 + 0.5 * p.C0() * s.x2 * s.x2;
}

OutputGradient output_gradient(const CircuitParams& p, const State& s) {
  const double L = inductance(p, s.x1);
  const double x1sq = s.x1 * s.x1;
  return {s.x1 * L * (1.0 + p.gamma() * x1sq * L * L), p.C0() * s.x2};
}

}  // namespace jjosc
