#include "jjosc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "jjosc/feedback_linearization.hpp"

namespace jjosc {

FeedbackGains FeedbackGains::decode(std::span<const double> flat) {
  if (flat.size() != 3) {
    throw std::invalid_argument("linear gains need 3 values, got " + std::to_string(flat.size()));
  }
  return {flat[0], flat[1], flat[2]};
}

double evaluate_gains(const FeedbackGains& g, double x1, double x2, double v) {
  return g.k1 * x1 + g.k2 * x2 + g.k3 * v;
}

std::size_t ControllerFamily::flat_size() const noexcept {
  return kind_ == Kind::Neural ? MLPParams::flat_size(n_hidden_) : 3;
}

Controller ControllerFamily::make(std::span<const double> flat) const {
  if (flat.size() != flat_size()) {
    throw std::invalid_argument("controller expects " + std::to_string(flat_size()) +
                                " parameters, got " + std::to_string(flat.size()));
  }
  if (kind_ == Kind::LinearGains) {
    const FeedbackGains g = FeedbackGains::decode(flat);
    return [g](const State& s, double v) { return evaluate_gains(g, s.x1, s.x2, v); };
  }
  return [w = std::vector<double>(flat.begin(), flat.end())](const State& s, double v) {
    return forward_flat(w, s.x1, s.x2, v);
  };
}

TrainConfig TrainConfig::defaults(const CircuitParams& p) {
  TrainConfig cfg;
  cfg.u_max = 0.95 * p.I0();
  return cfg;
}

void TrainConfig::validate() const {
  SimConfig{dt, n_samples, x0}.validate();
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(u_max > 0.0)) throw ConfigError("u_max must be positive");
  if (!(step_scale > 0.0)) throw ConfigError("step_scale must be positive");
  if (patience < 1) throw ConfigError("patience must be at least 1");
}

TrackingObjective::TrackingObjective(const CircuitParams& p, const TrainConfig& cfg)
    : p_(p), cfg_(cfg) {
  cfg_.validate();
  require_admissible(p_, cfg_.x0);
  std::vector<double> v(cfg_.n_samples + 1);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = cfg_.v(static_cast<double>(k) * cfg_.dt);
  y_d_ = reference_response(cfg_.tau, output_energy(p_, cfg_.x0), cfg_.dt, v);
  const double peak = *std::max_element(y_d_.begin(), y_d_.end());
  penalty_ = 10.0 * peak * peak;
}

Rollout TrackingObjective::rollout(const Controller& controller) const {
  const double u_max = cfg_.u_max;
  const Controller bounded = [&controller, u_max](const State& s, double v) {
    return saturate(controller(s, v), u_max);
  };
  Rollout r;
  r.y_d = y_d_;
  try {
    r.trajectory = simulate_nonlinear(p_, {cfg_.dt, cfg_.n_samples, cfg_.x0}, cfg_.v, bounded);
  } catch (const TrajectoryTruncated& e) {
    r.trajectory = e.partial();
    r.truncated = true;
  }
  const auto& y = r.trajectory.y;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double e = y_d_[k] - y[k];
    r.J += e * e;
  }
  if (r.truncated) r.J += penalty_ * static_cast<double>(y_d_.size() - y.size());
  return r;
}

double performance_index(const CircuitParams& p, const TrainConfig& cfg,
                         const Controller& controller) {
  return TrackingObjective(p, cfg)(controller);
}

TrainResult train(const CircuitParams& p, const TrainConfig& cfg, const ControllerFamily& family,
                  std::span<const double> init) {
  if (init.size() != family.flat_size()) {
    throw std::invalid_argument("initial vector has " + std::to_string(init.size()) +
                                " entries, family expects " + std::to_string(family.flat_size()));
  }
  const TrackingObjective objective(p, cfg);

  TrainResult res;
  res.best.assign(init.begin(), init.end());
  res.J_best = objective(family.make(res.best));
  res.J_init = res.J_best;
  res.log.reserve(cfg.max_evals);
  res.log.push_back({1, res.J_best, res.J_best, true});

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double step = cfg.step_scale;
  std::size_t rejections = 0;
  std::vector<double> candidate(res.best.size());

  for (std::size_t eval = 2; eval <= cfg.max_evals; ++eval) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      candidate[i] = res.best[i] + step * normal(rng);
    }
    const double J = objective(family.make(candidate));
    const bool accepted = J < res.J_best;
    if (accepted) {
      res.best = candidate;
      res.J_best = J;
      rejections = 0;
    } else if (++rejections >= cfg.patience) {
      step *= 0.5;
      rejections = 0;
    }
    res.log.push_back({eval, res.J_best, J, accepted});
  }
  res.final_step_scale = step;
  return res;
}

std::vector<double> random_init(const ControllerFamily& family, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> w(family.flat_size());
  for (double& x : w) x = uniform(rng);
  return w;
}

}  // namespace jjosc
