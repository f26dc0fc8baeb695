#include "jjosc/neural_controller.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "jjosc/csv.hpp"
#include "jjosc/errors.hpp"

namespace jjosc {

MLPParams::MLPParams(std::size_t n_hidden) : w_(n_hidden, {0.0, 0.0, 0.0}), c_(n_hidden, 0.0) {}

MLPParams::MLPParams(std::vector<std::array<double, kInputs>> W, std::vector<double> c)
    : w_(std::move(W)), c_(std::move(c)) {
  if (w_.size() != c_.size()) {
    throw std::invalid_argument("input and output weight counts differ");
  }
}

std::vector<double> MLPParams::encode() const {
  std::vector<double> flat;
  flat.reserve(flat_size(n_hidden()));
  for (const auto& row : w_) flat.insert(flat.end(), row.begin(), row.end());
  flat.insert(flat.end(), c_.begin(), c_.end());
  return flat;
}

MLPParams MLPParams::decode(std::span<const double> flat) {
  if (flat.empty() || flat.size() % (kInputs + 1) != 0) {
    throw std::invalid_argument("flat network encoding must have 4 N entries, got " +
                                std::to_string(flat.size()));
  }
  const std::size_t n = flat.size() / (kInputs + 1);
  std::vector<std::array<double, kInputs>> W(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kInputs; ++j) W[i][j] = flat[i * kInputs + j];
  }
  return {std::move(W), std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(n * kInputs),
                                            flat.end())};
}

double forward(const MLPParams& params, double x1, double x2, double v) {
  double u = 0.0;
  const auto& W = params.W();
  const auto& c = params.c();
  for (std::size_t i = 0; i < c.size(); ++i) {
    u += c[i] * std::tanh(W[i][0] * x1 + W[i][1] * x2 + W[i][2] * v);
  }
  return u;
}

double forward_flat(std::span<const double> flat, double x1, double x2, double v) {
  const std::size_t n = flat.size() / 4;
  double u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* w = flat.data() + 3 * i;
    u += flat[3 * n + i] * std::tanh(w[0] * x1 + w[1] * x2 + w[2] * v);
  }
  return u;
}

MLPParams load_table1() {
  return {{{-0.7958, -1.4315, 0.2044},
           {-0.8271, -0.0502, -1.4862},
           {1.7226, 0.3998, 2.7922},
           {-0.0450, 1.1977, 0.5819},
           {0.5180, -0.9837, -0.7239},
           {-1.0230, 0.1191, -0.2298},
           {0.8017, 0.3706, 1.0007},
           {-1.2453, 1.2427, 0.6089}},
          {1.2613, -3.7185, 0.4928, 0.4234, -0.3991, 1.2199, -0.2855, 0.6291}};
}

double saturate(double u, double u_max) { return std::clamp(u, -u_max, u_max); }

std::vector<double> read_parameter_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read parameter file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    double x = 0.0;
    const char* first = line.data() + b;
    const char* last = line.data() + e + 1;
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc{} || ptr != last || !std::isfinite(x)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
    values.push_back(x);
  }
  return values;
}

void write_parameter_file(const std::filesystem::path& path, std::span<const double> flat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write parameter file " + path.string());
  for (double x : flat) out << format_exact(x) << '\n';
}

}  // namespace jjosc
