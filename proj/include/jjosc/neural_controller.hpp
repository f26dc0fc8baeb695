#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace jjosc {

/// Weights of the bias-free NN(3, N, 1) controller
/// u = sum_i c_i tanh(w_i1 x1 + w_i2 x2 + w_i3 v).
class MLPParams {
 public:
  static constexpr std::size_t kInputs = 3;

  /// All-zero network with n_hidden neurons.
  explicit MLPParams(std::size_t n_hidden = 8);
  /// Throws std::invalid_argument if W and c sizes disagree.
  MLPParams(std::vector<std::array<double, kInputs>> W, std::vector<double> c);

  std::size_t n_hidden() const noexcept { return c_.size(); }
  const std::vector<std::array<double, kInputs>>& W() const noexcept { return w_; }
  const std::vector<double>& c() const noexcept { return c_; }

  /// Number of flat parameters for a network with n_hidden neurons: 4 N.
  static constexpr std::size_t flat_size(std::size_t n_hidden) {
    return n_hidden * (kInputs + 1);
  }

  /// Row-major W followed by c.
  std::vector<double> encode() const;
  /// Inverse of encode. The length must be a multiple of 4.
  static MLPParams decode(std::span<const double> flat);

 private:
  std::vector<std::array<double, kInputs>> w_;
  std::vector<double> c_;
};

double forward(const MLPParams& params, double x1, double x2, double v);

/// Same network evaluated straight from a flat encoding, without decoding.
double forward_flat(std::span<const double> flat, double x1, double x2, double v);

/// Published NN(3,8,1) weights of the trained linearizing controller.
MLPParams load_table1();

/// Clamp to [-u_max, u_max].
double saturate(double u, double u_max);

/// One decimal value per line. Blank lines and lines starting with '#' are
/// skipped. Throws ConfigError on unreadable files or bad numbers.
std::vector<double> read_parameter_file(const std::filesystem::path& path);
void write_parameter_file(const std::filesystem::path& path, std::span<const double> flat);

}  // namespace jjosc
