#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jjosc/circuit.hpp"
#include "jjosc/neural_controller.hpp"
#include "jjosc/simulation.hpp"

namespace jjosc {

/// Linear state feedback u = k1 x1 + k2 x2 + k3 v.
struct FeedbackGains {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;

  std::vector<double> encode() const { return {k1, k2, k3}; }
  /// Throws std::invalid_argument unless flat has exactly 3 entries.
  static FeedbackGains decode(std::span<const double> flat);

  /// Published trained gains (-0.6176, 0.0410, 1.8195).
  static FeedbackGains published() { return {-0.6176, 0.0410, 1.8195}; }
};

double evaluate_gains(const FeedbackGains& g, double x1, double x2, double v);

/// Which parametric controller a flat vector describes.
class ControllerFamily {
 public:
  enum class Kind { Neural, LinearGains };

  static ControllerFamily neural(std::size_t n_hidden = 8) { return {Kind::Neural, n_hidden}; }
  static ControllerFamily linear_gains() { return {Kind::LinearGains, 0}; }

  Kind kind() const noexcept { return kind_; }
  std::size_t n_hidden() const noexcept { return n_hidden_; }
  std::size_t flat_size() const noexcept;

  /// Unsaturated controller holding a copy of `flat`. Throws
  /// std::invalid_argument on a length mismatch.
  Controller make(std::span<const double> flat) const;

 private:
  ControllerFamily(Kind k, std::size_t n) : kind_(k), n_hidden_(n) {}
  Kind kind_;
  std::size_t n_hidden_;
};

struct TrainConfig {
  double dt = 0.01;
  std::size_t n_samples = 1000;
  double tau = 1.0;
  DriveSignal v;
  State x0{};
  std::uint64_t seed = 1;
  std::size_t max_evals = 20000;
  double step_scale = 0.1;
  /// Saturation bound applied to every control sample.
  double u_max = 0.19;
  /// Consecutive rejections before step_scale is halved.
  std::size_t patience = 200;

  /// Defaults with u_max = 0.95 I0.
  static TrainConfig defaults(const CircuitParams& p);
  /// Throws ConfigError on non-positive dt, tau, u_max or step_scale.
  void validate() const;
};

/// One closed-loop evaluation of a controller against the reference model.
struct Rollout {
  Trajectory trajectory;       ///< possibly partial
  std::vector<double> y_d;     ///< full horizon
  double J = 0.0;
  bool truncated = false;
};

/// Precomputes the reference and scores controllers by
/// J = sum_{k=0..NS} (y_d[k] - y[k])^2 with saturated zero-order-hold control.
/// A run that leaves the admissible region scores the J accumulated so far
/// plus 10 max(y_d)^2 per missing sample.
class TrackingObjective {
 public:
  TrackingObjective(const CircuitParams& p, const TrainConfig& cfg);

  Rollout rollout(const Controller& controller) const;
  double operator()(const Controller& controller) const { return rollout(controller).J; }

  const std::vector<double>& reference() const noexcept { return y_d_; }
  double penalty_per_missing_step() const noexcept { return penalty_; }

 private:
  CircuitParams p_;
  TrainConfig cfg_;
  std::vector<double> y_d_;
  double penalty_;
};

double performance_index(const CircuitParams& p, const TrainConfig& cfg,
                         const Controller& controller);

struct TrainLogEntry {
  std::size_t eval = 0;
  double J_best = 0.0;
  double J_candidate = 0.0;
  bool accepted = false;
};

struct TrainResult {
  std::vector<double> best;
  double J_best = 0.0;
  double J_init = 0.0;
  double final_step_scale = 0.0;
  /// One entry per objective evaluation; eval 1 is the initial point.
  std::vector<TrainLogEntry> log;
};

/// Gaussian-perturbation hill climbing on the flat parameter vector:
/// candidate = best + N(0, step_scale^2 I), kept only if J strictly
/// decreases; step_scale halves after `patience` consecutive rejections.
/// Runs exactly max_evals objective evaluations (the initial point included).
TrainResult train(const CircuitParams& p, const TrainConfig& cfg, const ControllerFamily& family,
                  std::span<const double> init);

/// Uniform [-1, 1] initial weights drawn from a generator seeded with `seed`.
std::vector<double> random_init(const ControllerFamily& family, std::uint64_t seed);

}  // namespace jjosc
