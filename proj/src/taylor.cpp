#include "jjosc/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jjosc {

State equilibrium(const CircuitParams& p, double u_bar) {
  if (!p.admissible(u_bar)) {
    throw DomainError("operating input " + std::to_string(u_bar) +
                      " A puts the junction at or beyond its critical current");
  }
  return {-u_bar, 0.0};
}

double natural_frequency(const CircuitParams& p, double x_bar1) {
  if (!p.admissible(x_bar1)) {
    throw DomainError("operating point " + std::to_string(x_bar1) +
                      " A is at or beyond the critical current");
  }
  const double r = x_bar1 / p.I0();
  return std::pow(1.0 - r * r, 0.25) / std::sqrt(p.L0() * p.C0());
}

LinearizedModel linearize(const CircuitParams& p, double u_bar) {
  const State eq = equilibrium(p, u_bar);
  LinearizedModel m;
  m.x_bar1 = eq.x1;
  m.x_bar2 = eq.x2;
  m.u_bar = u_bar;
  m.L_bar = inductance(p, eq.x1);

  // df1/dx1 is proportional to x2 and vanishes at equilibrium.
  m.A = {{{0.0, 1.0 / m.L_bar}, {-1.0 / p.C0(), 0.0}}};
  m.B = {0.0, -1.0 / p.C0()};

  const OutputGradient g = output_gradient(p, eq);
  m.c11 = g.dx1;
  m.c12 = g.dx2;
  m.omega0 = natural_frequency(p, eq.x1);
  m.k0 = m.c11 / (p.C0() * p.C0());
  return m;
}

std::vector<FrequencyPoint> natural_frequency_curve(const CircuitParams& p,
                                                    std::span<const double> x_bar1_grid) {
  std::vector<FrequencyPoint> out;
  out.reserve(x_bar1_grid.size());
  for (double x : x_bar1_grid) out.push_back({x, natural_frequency(p, x)});
  return out;
}

LinearOutputs linearized_outputs(const LinearizedModel& m, const CircuitParams& p, double z1,
                                 double z2) {
  return {m.c11 * z1 + m.c12 * z2, 0.5 * m.L_bar * z1 * z1 + 0.5 * p.C0() * z2 * z2};
}

double magnitude_response(const LinearizedModel& m, double omega) {
  if (!(omega >= 0.0)) throw DomainError("magnitude response needs omega >= 0");
  const double den = m.omega0 * m.omega0 - omega * omega;
  if (den == 0.0) {
    throw ResonanceError("omega = " + std::to_string(omega) +
                         " rad/s is the undamped pole of the linearized circuit");
  }
  return std::abs(m.k0) / std::abs(den);
}

double TaylorComparison::max_current_error() const {
  double e = 0.0;
  const std::size_t n = std::min(nonlinear.size(), linear.size());
  for (std::size_t k = 0; k < n; ++k) {
    e = std::max(e, std::abs(nonlinear.x1[k] - (model.x_bar1 + linear.x1[k])));
  }
  return e;
}

TaylorComparison taylor_compare(const CircuitParams& p, const SimConfig& cfg,
                                const BiasSine& drive) {
  TaylorComparison out;
  out.model = linearize(p, drive.a0);
  out.nonlinear = simulate_nonlinear(p, cfg, drive);

  SimConfig lin_cfg = cfg;
  lin_cfg.x0 = {cfg.x0.x1 - out.model.x_bar1, cfg.x0.x2 - out.model.x_bar2};
  const BiasSine deviation{0.0, drive.a1, drive.omega};
  out.linear = simulate_linear(out.model.A, out.model.B, lin_cfg, deviation);

  out.y0.reserve(out.linear.size());
  out.yl.reserve(out.linear.size());
  for (std::size_t k = 0; k < out.linear.size(); ++k) {
    const LinearOutputs o = linearized_outputs(out.model, p, out.linear.x1[k], out.linear.x2[k]);
    out.y0.push_back(o.y0);
    out.yl.push_back(o.yl);
  }
  return out;
}

}  // namespace jjosc
