#include "jjosc/scenario.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "jjosc/csv.hpp"
#include "jjosc/neural_controller.hpp"
#include "jjosc/taylor.hpp"

namespace fs = std::filesystem;

namespace jjosc {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Simulate: return "simulate";
    case Mode::TaylorCompare: return "taylor-compare";
    case Mode::Omega0Curve: return "omega0-curve";
    case Mode::ExactFl: return "exact-fl";
    case Mode::TrainNn: return "train-nn";
    case Mode::TrainLinear: return "train-linear";
    case Mode::Replay: return "replay";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

class Section {
 public:
  Section() = default;
  Section(std::string name, std::size_t line) : name_(std::move(name)), line_(line) {}

  void add(const std::string& key, Entry e) {
    if (entries_.count(key)) {
      throw ConfigError(fmt::format("line {}: duplicate key '{}' in [{}]", e.line, key, name_));
    }
    entries_.emplace(key, std::move(e));
  }

  std::optional<std::string> get(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) throw ConfigError(fmt::format("[{}] is missing required key '{}'", name_, key));
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    auto v = get(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(fmt::format("[{}] is missing required key '{}'", name_, key));
    }
    return parse_double(*v, key);
  }

  std::uint64_t integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
    auto v = get(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(fmt::format("[{}] is missing required key '{}'", name_, key));
    }
    std::uint64_t x = 0;
    const char* last = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), last, x);
    if (ec != std::errc{} || ptr != last) {
      throw ConfigError(fmt::format("line {}: '{}' expects a non-negative integer, got '{}'",
                                    line_of(key), key, *v));
    }
    return x;
  }

  std::vector<double> list(const std::string& key) {
    const std::string raw = require(key);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key));
    return out;
  }

  State state(const std::string& key, State fallback) {
    if (!entries_.count(key)) return fallback;
    const auto xs = list(key);
    if (xs.size() != 2) {
      throw ConfigError(fmt::format("line {}: '{}' expects two values 'x1, x2'", line_of(key), key));
    }
    return {xs[0], xs[1]};
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", e.line, key, name_));
    }
  }

  std::size_t line() const { return line_; }
  const std::string& name() const { return name_; }

 private:
  std::size_t line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? line_ : it->second.line;
  }

  double parse_double(const std::string& s, const std::string& key) const {
    double x = 0.0;
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), last, x);
    if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(x)) {
      throw ConfigError(fmt::format("line {}: '{}' expects a number, got '{}'", line_of(key), key, s));
    }
    return x;
  }

  std::string name_;
  std::size_t line_ = 0;
  std::map<std::string, Entry> entries_;
};

using Sections = std::map<std::string, Section>;

Sections read_sections(std::istream& in) {
  Sections sections;
  Section* current = nullptr;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: malformed section header", lineno));
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (sections.count(name)) throw ConfigError(fmt::format("line {}: duplicate section [{}]", lineno, name));
      current = &sections.emplace(name, Section(name, lineno)).first->second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
    if (!current) throw ConfigError(fmt::format("line {}: assignment outside of a section", lineno));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", lineno));
    current->add(key, {trim(std::string_view(line).substr(eq + 1)), lineno, false});
  }
  return sections;
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Simulate, Mode::TaylorCompare, Mode::Omega0Curve, Mode::ExactFl, Mode::TrainNn,
                 Mode::TrainLinear, Mode::Replay}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

std::set<std::string> sections_for(Mode mode) {
  switch (mode) {
    case Mode::Simulate:
    case Mode::TaylorCompare: return {"scenario", "circuit", "sim", "drive"};
    case Mode::Omega0Curve: return {"scenario", "circuit", "curve"};
    case Mode::ExactFl: return {"scenario", "circuit", "sim", "drive", "reference"};
    case Mode::TrainNn:
    case Mode::TrainLinear: return {"scenario", "circuit", "train", "drive"};
    case Mode::Replay: return {"scenario", "circuit", "sim", "drive", "reference", "controller"};
  }
  return {};
}

Section& need(Sections& s, const std::string& name) {
  auto it = s.find(name);
  if (it == s.end()) throw ConfigError("missing section [" + name + "]");
  return it->second;
}

DriveSignal parse_drive(Section& sec) {
  const std::string type = sec.require("type");
  if (type == "bias-sine") {
    return BiasSine{sec.number("a0"), sec.number("a1", 0.0), sec.number("omega", 0.0)};
  }
  if (type == "piecewise") {
    const auto times = sec.list("times");
    const auto levels = sec.list("levels");
    if (times.size() != levels.size()) {
      throw ConfigError("[drive] 'times' and 'levels' must have the same length");
    }
    std::vector<Breakpoint> bps;
    for (std::size_t i = 0; i < times.size(); ++i) bps.push_back({times[i], levels[i]});
    return PiecewiseConstant(std::move(bps));
  }
  throw ConfigError("[drive] unknown type '" + type + "' (expected bias-sine or piecewise)");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_state(const CircuitParams& p, const State& s, const std::string& what) {
  if (!p.admissible(s.x1)) {
    throw ConfigError(fmt::format("{} has |x1| = {} at or beyond I0 = {}", what, std::abs(s.x1), p.I0()));
  }
}

}  // namespace

Scenario parse_scenario(std::istream& in, const fs::path& base_dir, const std::string& default_output) {
  Sections sections = read_sections(in);
  Scenario sc;

  Section& head = need(sections, "scenario");
  sc.mode = parse_mode(head.require("mode"));
  sc.output = head.get("output").value_or(default_output);

  const auto allowed = sections_for(sc.mode);
  for (const auto& [name, sec] : sections) {
    if (!allowed.count(name)) {
      throw ConfigError(fmt::format("line {}: section [{}] is not used by mode {}", sec.line(), name,
                                    to_string(sc.mode)));
    }
  }

  Section& circ = need(sections, "circuit");
  try {
    sc.circuit = CircuitParams(circ.number("I0"), circ.number("kappa"), circ.number("C0"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[circuit] ") + e.what());
  }
  const CircuitParams& p = sc.circuit;

  if (allowed.count("sim")) {
    Section& sim = need(sections, "sim");
    sc.sim.dt = sim.number("dt");
    sc.sim.n_samples = sim.integer("n_samples");
    sc.sim.x0 = sim.state("x0", {});
    sc.sim.validate();
    check_state(p, sc.sim.x0, "[sim] x0");
  }

  if (allowed.count("drive")) sc.drive = parse_drive(need(sections, "drive"));

  if (allowed.count("reference")) {
    Section& ref = need(sections, "reference");
    sc.reference.tau = ref.number("tau");
    if (ref.get("y_d0")) sc.reference.y_d0 = ref.number("y_d0");
    sc.reference.validate();
  }

  switch (sc.mode) {
    case Mode::TaylorCompare: {
      const auto* bias = std::get_if<BiasSine>(&sc.drive.variant());
      if (!bias) throw ConfigError("taylor-compare needs a bias-sine drive (a0 is the operating point)");
      if (!p.admissible(bias->a0)) {
        throw ConfigError(fmt::format("[drive] a0 = {} puts the equilibrium at or beyond I0", bias->a0));
      }
      break;
    }
    case Mode::Omega0Curve: {
      Section& curve = need(sections, "curve");
      const double lo = curve.number("x_min");
      const double hi = curve.number("x_max");
      const auto n = curve.integer("points");
      if (n < 2 || !(hi > lo)) throw ConfigError("[curve] needs x_max > x_min and points >= 2");
      for (std::uint64_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        if (!p.admissible(x)) throw ConfigError(fmt::format("[curve] grid point {} is not below I0", x));
        sc.curve_grid.push_back(x);
      }
      break;
    }
    case Mode::ExactFl:
      if (!(std::abs(sc.sim.x0.x2) > kSingularityGuard)) {
        throw ConfigError("[sim] x0 has x2 inside the singularity guard of the exact control law");
      }
      break;
    case Mode::Replay: {
      Section& ctl = need(sections, "controller");
      const std::string type = ctl.require("type");
      sc.controller_file = resolve(base_dir, ctl.require("file"));
      sc.controller_params = read_parameter_file(sc.controller_file);
      if (type == "nn") {
        if (sc.controller_params.empty() || sc.controller_params.size() % 4 != 0) {
          throw ConfigError("network parameter file must hold 4 N values");
        }
        sc.controller = ControllerFamily::neural(sc.controller_params.size() / 4);
      } else if (type == "linear") {
        if (sc.controller_params.size() != 3) throw ConfigError("gains file must hold exactly 3 values");
        sc.controller = ControllerFamily::linear_gains();
      } else {
        throw ConfigError("[controller] unknown type '" + type + "' (expected nn or linear)");
      }
      sc.u_max = ctl.number("u_max", 0.95 * p.I0());
      if (!(sc.u_max > 0.0)) throw ConfigError("[controller] u_max must be positive");
      ctl.reject_unused();
      break;
    }
    case Mode::TrainNn:
    case Mode::TrainLinear: {
      Section& tr = need(sections, "train");
      TrainConfig cfg = TrainConfig::defaults(p);
      cfg.v = sc.drive;
      cfg.dt = tr.number("dt", cfg.dt);
      cfg.n_samples = tr.integer("n_samples", cfg.n_samples);
      cfg.tau = tr.number("tau", cfg.tau);
      cfg.x0 = tr.state("x0", cfg.x0);
      cfg.seed = tr.integer("seed", cfg.seed);
      cfg.max_evals = tr.integer("max_evals", cfg.max_evals);
      cfg.step_scale = tr.number("step_scale", 0.3);
      cfg.u_max = tr.number("u_max", cfg.u_max);
      cfg.patience = tr.integer("patience", cfg.patience);
      cfg.validate();
      check_state(p, cfg.x0, "[train] x0");
      sc.controller = sc.mode == Mode::TrainNn ? ControllerFamily::neural(tr.integer("n_hidden", 8))
                                               : ControllerFamily::linear_gains();
      if (sc.controller.flat_size() == 0) throw ConfigError("[train] n_hidden must be at least 1");
      sc.init_source = tr.get("init").value_or(sc.mode == Mode::TrainNn ? "random" : "zero");
      if (sc.init_source == "random") {
        sc.init = random_init(sc.controller, cfg.seed);
      } else if (sc.init_source == "zero") {
        sc.init.assign(sc.controller.flat_size(), 0.0);
      } else {
        sc.init = read_parameter_file(resolve(base_dir, sc.init_source));
        if (sc.init.size() != sc.controller.flat_size()) {
          throw ConfigError(fmt::format("init file has {} values, controller needs {}", sc.init.size(),
                                        sc.controller.flat_size()));
        }
      }
      sc.train = std::move(cfg);
      break;
    }
    case Mode::Simulate: break;
  }

  for (const auto& [name, sec] : sections) sec.reject_unused();
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  return parse_scenario(in, path.parent_path(), path.stem().string());
}

namespace {

class Outputs {
 public:
  explicit Outputs(fs::path prefix) : prefix_(std::move(prefix)) {
    if (prefix_.has_parent_path()) fs::create_directories(prefix_.parent_path());
  }

  std::ofstream open(const std::string& suffix) {
    fs::path path = prefix_;
    path += suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    files.push_back(path);
    return out;
  }

  std::string name(const std::string& suffix) const {
    fs::path path = prefix_;
    path += suffix;
    return path.filename().string();
  }

  std::vector<fs::path> files;

 private:
  fs::path prefix_;
};

class Meta {
 public:
  template <typename T>
  void add(const std::string& key, const T& value) {
    if constexpr (std::is_floating_point_v<T>) {
      text_ += fmt::format("{} = {}\n", key, format_exact(value));
    } else {
      text_ += fmt::format("{} = {}\n", key, value);
    }
  }
  void state(const std::string& key, const State& s) {
    add(key, format_exact(s.x1) + ", " + format_exact(s.x2));
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string describe(const DriveSignal& d) {
  if (const auto* b = std::get_if<BiasSine>(&d.variant())) {
    return fmt::format("bias-sine a0={} a1={} omega={}", format_exact(b->a0), format_exact(b->a1),
                       format_exact(b->omega));
  }
  std::string s = "piecewise";
  for (const auto& bp : std::get<PiecewiseConstant>(d.variant()).breakpoints()) {
    s += fmt::format(" {}:{}", format_exact(bp.t_start), format_exact(bp.level));
  }
  return s;
}

void circuit_meta(Meta& m, const Scenario& sc) {
  m.add("mode", to_string(sc.mode));
  m.add("I0", sc.circuit.I0());
  m.add("kappa", sc.circuit.kappa());
  m.add("C0", sc.circuit.C0());
  m.add("L0", sc.circuit.L0());
  m.add("gamma", sc.circuit.gamma());
}

void sim_meta(Meta& m, const SimConfig& cfg) {
  m.add("dt", cfg.dt);
  m.add("n_samples", cfg.n_samples);
  m.state("x0", cfg.x0);
}

std::string gnuplot_header(const std::string& png) {
  return fmt::format(
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set terminal pngcairo size 900,600\n"
      "set output '{}'\n"
      "set grid\n",
      png);
}

void write_plot(Outputs& out, const std::string& body) {
  auto gp = out.open(".gp");
  gp << gnuplot_header(out.name(".png")) << body;
}

void write_log_csv(std::ostream& os, const TrainResult& res) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "eval,J_best,J_candidate,accepted\n");
  for (const auto& e : res.log) {
    fmt::format_to(std::back_inserter(buf), "{},{:.12g},{:.12g},{}\n", e.eval, e.J_best, e.J_candidate,
                   e.accepted ? 1 : 0);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_closed_loop_csv(std::ostream& os, const Trajectory& traj, const std::vector<double>& y_d) {
  const std::vector<double> yd(y_d.begin(), y_d.begin() + static_cast<std::ptrdiff_t>(traj.size()));
  const CsvColumn cols[] = {{"t", &traj.t}, {"x1", &traj.x1}, {"x2", &traj.x2}, {"v", &traj.v},
                            {"u", &traj.u}, {"y", &traj.y},   {"y_d", &yd}};
  write_csv(os, cols);
}

const char* kClosedLoopPlot =
    "set multiplot layout 2,1\n"
    "plot data using 't':'y' with lines lw 2, data using 't':'y_d' with lines dt 2\n"
    "plot data using 't':'v' with steps, data using 't':'u' with lines\n"
    "unset multiplot\n";

std::string with_data(Outputs& out, const std::string& body) {
  return fmt::format("data = '{}'\n", out.name(".csv")) + body;
}

int run_simulate(const Scenario& sc, Outputs& out, Meta& meta) {
  sim_meta(meta, sc.sim);
  meta.add("drive", describe(sc.drive));
  int code = 0;
  Trajectory traj;
  try {
    traj = simulate_nonlinear(sc.circuit, sc.sim, sc.drive);
    meta.add("status", "completed");
  } catch (const TrajectoryTruncated& e) {
    traj = e.partial();
    meta.add("status", std::string("truncated: ") + e.what());
    code = 2;
  }
  if (auto w = estimate_angular_frequency(traj.x1, sc.sim.dt)) meta.add("omega_estimate", *w);
  auto csv = out.open(".csv");
  write_trajectory_csv(csv, traj);
  write_plot(out, with_data(out,
                            "set multiplot layout 2,1\n"
                            "plot data using 't':'x1' with lines, data using 't':'x2' with lines\n"
                            "plot data using 't':'y' with lines\n"
                            "unset multiplot\n"));
  return code;
}

int run_taylor(const Scenario& sc, Outputs& out, Meta& meta) {
  sim_meta(meta, sc.sim);
  meta.add("drive", describe(sc.drive));
  const auto& bias = std::get<BiasSine>(sc.drive.variant());
  TaylorComparison cmp;
  int code = 0;
  try {
    cmp = taylor_compare(sc.circuit, sc.sim, bias);
    meta.add("status", "completed");
  } catch (const TrajectoryTruncated& e) {
    // Nonlinear part stopped early; the linear model still runs over the
    // recorded horizon.
    SimConfig partial = sc.sim;
    partial.n_samples = e.partial().size() - 1;
    cmp = taylor_compare(sc.circuit, partial, bias);
    meta.add("status", std::string("truncated: ") + e.what());
    code = 2;
  }
  const auto& m = cmp.model;
  meta.add("x_bar1", m.x_bar1);
  meta.add("x_bar2", m.x_bar2);
  meta.add("c11", m.c11);
  meta.add("c12", m.c12);
  meta.add("omega0", m.omega0);
  meta.add("k0", m.k0);
  meta.add("max_current_error", cmp.max_current_error());
  if (auto w = estimate_angular_frequency(cmp.nonlinear.x1, sc.sim.dt)) meta.add("omega_nonlinear", *w);
  if (auto w = estimate_angular_frequency(cmp.linear.x1, sc.sim.dt)) meta.add("omega_linear", *w);

  std::vector<double> x1_lin(cmp.linear.size()), x2_lin(cmp.linear.size());
  for (std::size_t k = 0; k < cmp.linear.size(); ++k) {
    x1_lin[k] = m.x_bar1 + cmp.linear.x1[k];
    x2_lin[k] = m.x_bar2 + cmp.linear.x2[k];
  }
  const auto& nl = cmp.nonlinear;
  const CsvColumn cols[] = {{"t", &nl.t},          {"x1", &nl.x1},       {"x2", &nl.x2},
                            {"u", &nl.u},          {"y", &nl.y},         {"z1", &cmp.linear.x1},
                            {"z2", &cmp.linear.x2}, {"x1_lin", &x1_lin}, {"x2_lin", &x2_lin},
                            {"y0", &cmp.y0},       {"y_l", &cmp.yl}};
  auto csv = out.open(".csv");
  write_csv(csv, cols);
  write_plot(out, with_data(out,
                            "set multiplot layout 3,1\n"
                            "plot data using 't':'x1' with lines lw 2, data using 't':'x1_lin' with lines dt 2\n"
                            "plot data using 't':'x2' with lines lw 2, data using 't':'x2_lin' with lines dt 2\n"
                            "plot data using 't':'y' with lines lw 2, data using 't':'y0' with lines dt 2, "
                            "data using 't':'y_l' with lines\n"
                            "unset multiplot\n"));
  return code;
}

int run_curve(const Scenario& sc, Outputs& out, Meta& meta) {
  const auto curve = natural_frequency_curve(sc.circuit, sc.curve_grid);
  std::vector<double> xs, ws;
  for (const auto& pt : curve) {
    xs.push_back(pt.x_bar1);
    ws.push_back(pt.omega0);
  }
  meta.add("points", curve.size());
  meta.add("x_min", xs.front());
  meta.add("x_max", xs.back());
  meta.add("status", "completed");
  const CsvColumn cols[] = {{"x_bar1", &xs}, {"omega0", &ws}};
  auto csv = out.open(".csv");
  write_csv(csv, cols);
  write_plot(out, with_data(out, "plot data using 'x_bar1':'omega0' with lines lw 2\n"));
  return 0;
}

int run_exact(const Scenario& sc, Outputs& out, Meta& meta) {
  sim_meta(meta, sc.sim);
  meta.add("drive", describe(sc.drive));
  meta.add("tau", sc.reference.tau);
  const double y_d0 = sc.reference.y_d0.value_or(output_energy(sc.circuit, sc.sim.x0));
  meta.add("y_d0", y_d0);
  Trajectory traj;
  std::vector<double> y_d;
  int code = 0;
  try {
    ExactFlRun run = run_exact_fl(sc.circuit, sc.sim, sc.reference, sc.drive);
    traj = std::move(run.trajectory);
    y_d = std::move(run.y_d);
    meta.add("status", "completed");
  } catch (const TrajectoryTruncated& e) {
    traj = e.partial();
    y_d = reference_response(sc.reference.tau, y_d0, sc.sim.dt, traj.v);
    meta.add("status", std::string("truncated: ") + e.what());
    code = 2;
  }
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) err = std::max(err, std::abs(traj.y[k] - y_d[k]));
  meta.add("samples", traj.size());
  meta.add("max_tracking_error", err);
  const CsvColumn cols[] = {{"t", &traj.t}, {"x1", &traj.x1}, {"x2", &traj.x2},
                            {"u", &traj.u}, {"y", &traj.y},   {"y_d", &y_d}};
  auto csv = out.open(".csv");
  write_csv(csv, cols);
  write_plot(out, with_data(out,
                            "set multiplot layout 2,1\n"
                            "plot data using 't':'y' with lines lw 2, data using 't':'y_d' with lines dt 2\n"
                            "plot data using 't':'u' with lines\n"
                            "unset multiplot\n"));
  return code;
}

int run_replay(const Scenario& sc, Outputs& out, Meta& meta) {
  sim_meta(meta, sc.sim);
  meta.add("drive", describe(sc.drive));
  meta.add("tau", sc.reference.tau);
  meta.add("controller_file", sc.controller_file.filename().string());
  meta.add("u_max", sc.u_max);

  const Controller raw = sc.controller.make(sc.controller_params);
  const double u_max = sc.u_max;
  const Controller bounded = [&raw, u_max](const State& s, double v) { return saturate(raw(s, v), u_max); };
  int code = 0;
  Trajectory traj;
  try {
    traj = simulate_nonlinear(sc.circuit, sc.sim, sc.drive, bounded);
    meta.add("status", "completed");
  } catch (const TrajectoryTruncated& e) {
    traj = e.partial();
    meta.add("status", std::string("truncated: ") + e.what());
    code = 2;
  }
  const double y_d0 = sc.reference.y_d0.value_or(output_energy(sc.circuit, sc.sim.x0));
  const auto y_d = reference_response(sc.reference.tau, y_d0, sc.sim.dt, traj.v);
  double J = 0.0, u_peak = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    J += (y_d[k] - traj.y[k]) * (y_d[k] - traj.y[k]);
    u_peak = std::max(u_peak, std::abs(traj.u[k]));
  }
  meta.add("J", J);
  meta.add("max_abs_u", u_peak);
  auto csv = out.open(".csv");
  write_closed_loop_csv(csv, traj, y_d);
  write_plot(out, with_data(out, kClosedLoopPlot));
  return code;
}

int run_train(const Scenario& sc, Outputs& out, Meta& meta) {
  const TrainConfig& cfg = sc.train;
  meta.add("family", sc.controller.kind() == ControllerFamily::Kind::Neural
                         ? fmt::format("nn(3,{},1)", sc.controller.n_hidden())
                         : std::string("linear"));
  meta.add("dt", cfg.dt);
  meta.add("n_samples", cfg.n_samples);
  meta.add("tau", cfg.tau);
  meta.state("x0", cfg.x0);
  meta.add("drive", describe(cfg.v));
  meta.add("seed", cfg.seed);
  meta.add("max_evals", cfg.max_evals);
  meta.add("step_scale", cfg.step_scale);
  meta.add("patience", cfg.patience);
  meta.add("u_max", cfg.u_max);
  meta.add("init", sc.init_source);

  const TrainResult res = train(sc.circuit, cfg, sc.controller, sc.init);
  const TrackingObjective objective(sc.circuit, cfg);
  const Rollout best = objective.rollout(sc.controller.make(res.best));

  meta.add("evals", res.log.size());
  meta.add("J_init", res.J_init);
  meta.add("J_best", res.J_best);
  meta.add("final_step_scale", res.final_step_scale);
  meta.add("best_truncated", best.truncated ? "yes" : "no");
  meta.add("status", "completed");

  auto csv = out.open(".csv");
  write_closed_loop_csv(csv, best.trajectory, best.y_d);
  auto log = out.open(".log.csv");
  write_log_csv(log, res);
  fs::path params = out.files.front();
  params.replace_extension(sc.controller.kind() == ControllerFamily::Kind::Neural ? ".params" : ".gains");
  write_parameter_file(params, res.best);
  out.files.push_back(params);
  write_plot(out, with_data(out, kClosedLoopPlot));
  return 0;
}

}  // namespace

RunOutcome run_scenario(Scenario sc, const RunOptions& options) {
  if (options.seed) {
    if (sc.mode == Mode::TrainNn || sc.mode == Mode::TrainLinear) {
      sc.train.seed = *options.seed;
      if (sc.init_source == "random") sc.init = random_init(sc.controller, sc.train.seed);
    }
  }
  fs::path prefix = options.out.value_or(sc.output);
  if (prefix.is_relative() && options.output_dir) prefix = *options.output_dir / prefix;

  RunOutcome outcome;
  Outputs out(prefix);
  Meta meta;
  circuit_meta(meta, sc);
  try {
    switch (sc.mode) {
      case Mode::Simulate: outcome.exit_code = run_simulate(sc, out, meta); break;
      case Mode::TaylorCompare: outcome.exit_code = run_taylor(sc, out, meta); break;
      case Mode::Omega0Curve: outcome.exit_code = run_curve(sc, out, meta); break;
      case Mode::ExactFl: outcome.exit_code = run_exact(sc, out, meta); break;
      case Mode::Replay: outcome.exit_code = run_replay(sc, out, meta); break;
      case Mode::TrainNn:
      case Mode::TrainLinear: outcome.exit_code = run_train(sc, out, meta); break;
    }
  } catch (const ConfigError& e) {
    outcome.exit_code = 1;
    outcome.message = e.what();
  } catch (const std::domain_error& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
    meta.add("status", std::string("error: ") + e.what());
  }
  if (outcome.exit_code != 1) {
    auto m = out.open(".meta");
    m << meta.text();
  }
  outcome.files = out.files;
  if (outcome.message.empty() && outcome.exit_code == 2) outcome.message = "run stopped early, partial output written";
  return outcome;
}

RunOutcome run_scenario(const fs::path& path, const RunOptions& options) {
  Scenario sc;
  try {
    sc = load_scenario(path);
  } catch (const ConfigError& e) {
    return {1, e.what(), {}};
  }
  return run_scenario(std::move(sc), options);
}

}  // namespace jjosc
