#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jjosc/circuit.hpp"
#include "jjosc/feedback_linearization.hpp"
#include "jjosc/neural_controller.hpp"
#include "jjosc/scenario.hpp"
#include "jjosc/simulation.hpp"
#include "jjosc/taylor.hpp"
#include "jjosc/trainer.hpp"

namespace py = pybind11;
using namespace jjosc;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

ControllerFamily family_from(const std::string& name, std::size_t n_hidden) {
  if (name == "nn") return ControllerFamily::neural(n_hidden);
  if (name == "linear") return ControllerFamily::linear_gains();
  throw py::value_error("family must be 'nn' or 'linear'");
}

}  // namespace

PYBIND11_MODULE(jjosc, m) {
  m.doc() = "Nonlinear LC oscillator with a Josephson-junction inductance";

  auto base = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", base);
  py::register_exception<ResonanceError>(m, "ResonanceError", base);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  static py::exception<TrajectoryTruncated> truncated(m, "TrajectoryTruncated", PyExc_RuntimeError);

  py::class_<CircuitParams>(m, "CircuitParams")
      .def(py::init<double, double, double>(), py::arg("I0"), py::arg("kappa"), py::arg("C0"))
      .def_static("reference", &CircuitParams::reference)
      .def_property_readonly("I0", &CircuitParams::I0)
      .def_property_readonly("kappa", &CircuitParams::kappa)
      .def_property_readonly("C0", &CircuitParams::C0)
      .def_property_readonly("L0", &CircuitParams::L0)
      .def_property_readonly("gamma", &CircuitParams::gamma);

  py::class_<State>(m, "State")
      .def(py::init<double, double>(), py::arg("x1") = 0.0, py::arg("x2") = 0.0)
      .def_readwrite("x1", &State::x1)
      .def_readwrite("x2", &State::x2)
      .def("__repr__", [](const State& s) {
        return "State(x1=" + std::to_string(s.x1) + ", x2=" + std::to_string(s.x2) + ")";
      });

  m.def("inductance", &inductance, py::arg("p"), py::arg("x1"));
  m.def("dynamics", [](const CircuitParams& p, const State& s, double u) {
    const auto r = dynamics(p, s, u);
    return py::make_tuple(r.dx1, r.dx2);
  }, py::arg("p"), py::arg("s"), py::arg("u"));
  m.def("output_energy", &output_energy, py::arg("p"), py::arg("s"));
  m.def("output_gradient", [](const CircuitParams& p, const State& s) {
    const auto g = output_gradient(p, s);
    return py::make_tuple(g.dx1, g.dx2);
  }, py::arg("p"), py::arg("s"));

  py::class_<BiasSine>(m, "BiasSine")
      .def(py::init<double, double, double>(), py::arg("a0"), py::arg("a1") = 0.0, py::arg("omega") = 0.0)
      .def_readwrite("a0", &BiasSine::a0)
      .def_readwrite("a1", &BiasSine::a1)
      .def_readwrite("omega", &BiasSine::omega);

  py::class_<DriveSignal>(m, "DriveSignal")
      .def(py::init<BiasSine>())
      .def_static("constant", &DriveSignal::constant)
      .def_static("piecewise", [](const std::vector<std::pair<double, double>>& bps) {
        std::vector<Breakpoint> out;
        for (const auto& [t, level] : bps) out.push_back({t, level});
        return DriveSignal(PiecewiseConstant(std::move(out)));
      }, py::arg("breakpoints"))
      .def("__call__", &DriveSignal::operator());
  py::implicitly_convertible<BiasSine, DriveSignal>();

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init([](double dt, std::size_t n, State x0) { return SimConfig{dt, n, x0}; }),
           py::arg("dt") = 0.01, py::arg("n_samples") = 2000, py::arg("x0") = State{})
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("n_samples", &SimConfig::n_samples)
      .def_readwrite("x0", &SimConfig::x0);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("t", [](const Trajectory& t) { return to_array(t.t); })
      .def_property_readonly("x1", [](const Trajectory& t) { return to_array(t.x1); })
      .def_property_readonly("x2", [](const Trajectory& t) { return to_array(t.x2); })
      .def_property_readonly("u", [](const Trajectory& t) { return to_array(t.u); })
      .def_property_readonly("v", [](const Trajectory& t) { return to_array(t.v); })
      .def_property_readonly("y", [](const Trajectory& t) { return to_array(t.y); })
      .def("__len__", &Trajectory::size);

  // Truncated runs surface as TrajectoryTruncated; the partial trajectory is
  // attached as the exception's `partial` attribute.
  py::register_exception_translator([](std::exception_ptr ep) {
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const TrajectoryTruncated& e) {
      py::object exc = py::handle(truncated.ptr())(e.what());
      exc.attr("partial") = py::cast(e.partial());
      PyErr_SetObject(truncated.ptr(), exc.ptr());
    }
  });

  m.def("simulate_nonlinear",
        [](const CircuitParams& p, const SimConfig& cfg, const DriveSignal& drive,
           std::optional<std::function<double(double, double, double)>> controller) {
          Controller c;
          if (controller) {
            c = [f = *controller](const State& s, double v) { return f(s.x1, s.x2, v); };
          }
          return simulate_nonlinear(p, cfg, drive, c);
        },
        py::arg("p"), py::arg("cfg"), py::arg("drive"), py::arg("controller") = py::none(),
        "controller, when given, is called as controller(x1, x2, v) -> u");
  m.def("simulate_linear", &simulate_linear, py::arg("A"), py::arg("B"), py::arg("cfg"), py::arg("drive"));
  m.def("estimate_angular_frequency",
        [](const std::vector<double>& x, double dt, double skip) { return estimate_angular_frequency(x, dt, skip); },
        py::arg("signal"), py::arg("dt"), py::arg("skip_fraction") = 0.25);

  py::class_<LinearizedModel>(m, "LinearizedModel")
      .def_readonly("x_bar1", &LinearizedModel::x_bar1)
      .def_readonly("x_bar2", &LinearizedModel::x_bar2)
      .def_readonly("u_bar", &LinearizedModel::u_bar)
      .def_readonly("A", &LinearizedModel::A)
      .def_readonly("B", &LinearizedModel::B)
      .def_readonly("c11", &LinearizedModel::c11)
      .def_readonly("c12", &LinearizedModel::c12)
      .def_readonly("omega0", &LinearizedModel::omega0)
      .def_readonly("k0", &LinearizedModel::k0);

  m.def("equilibrium", &equilibrium, py::arg("p"), py::arg("u_bar"));
  m.def("linearize", &linearize, py::arg("p"), py::arg("u_bar"));
  m.def("natural_frequency", &natural_frequency, py::arg("p"), py::arg("x_bar1"));
  m.def("natural_frequency_curve", [](const CircuitParams& p, const std::vector<double>& grid) {
    std::vector<std::pair<double, double>> out;
    for (const auto& pt : natural_frequency_curve(p, grid)) out.emplace_back(pt.x_bar1, pt.omega0);
    return out;
  }, py::arg("p"), py::arg("x_bar1_grid"));
  m.def("linearized_outputs", [](const LinearizedModel& lm, const CircuitParams& p, double z1, double z2) {
    const auto o = linearized_outputs(lm, p, z1, z2);
    return py::make_tuple(o.y0, o.yl);
  }, py::arg("m"), py::arg("p"), py::arg("z1"), py::arg("z2"));
  m.def("magnitude_response", &magnitude_response, py::arg("m"), py::arg("omega"));

  m.def("output_rate", &output_rate, py::arg("p"), py::arg("s"), py::arg("u"));
  m.def("exact_control", &exact_control, py::arg("p"), py::arg("s"), py::arg("v"), py::arg("tau"));
  m.def("reference_response",
        [](double tau, double y_d0, double dt, const std::vector<double>& v) {
          return to_array(reference_response(tau, y_d0, dt, v));
        },
        py::arg("tau"), py::arg("y_d0"), py::arg("dt"), py::arg("v"));
  m.def("run_exact_fl",
        [](const CircuitParams& p, const SimConfig& cfg, double tau, const DriveSignal& v) {
          auto run = run_exact_fl(p, cfg, {tau, std::nullopt}, v);
          return py::make_tuple(run.trajectory, to_array(run.y_d), run.max_tracking_error);
        },
        py::arg("p"), py::arg("cfg"), py::arg("tau"), py::arg("v"),
        "Returns (trajectory, y_d, max |y - y_d|).");

  py::class_<MLPParams>(m, "MLPParams")
      .def(py::init<std::size_t>(), py::arg("n_hidden") = 8)
      .def_property_readonly("n_hidden", &MLPParams::n_hidden)
      .def_property_readonly("W", &MLPParams::W)
      .def_property_readonly("c", &MLPParams::c)
      .def("encode", &MLPParams::encode)
      .def_static("decode", [](const std::vector<double>& flat) { return MLPParams::decode(flat); });
  m.def("forward", &forward, py::arg("params"), py::arg("x1"), py::arg("x2"), py::arg("v"));
  m.def("load_table1", &load_table1);
  m.def("saturate", &saturate, py::arg("u"), py::arg("u_max"));

  py::class_<FeedbackGains>(m, "FeedbackGains")
      .def(py::init([](double k1, double k2, double k3) { return FeedbackGains{k1, k2, k3}; }),
           py::arg("k1"), py::arg("k2"), py::arg("k3"))
      .def_static("published", &FeedbackGains::published)
      .def_readwrite("k1", &FeedbackGains::k1)
      .def_readwrite("k2", &FeedbackGains::k2)
      .def_readwrite("k3", &FeedbackGains::k3);
  m.def("evaluate_gains", &evaluate_gains, py::arg("g"), py::arg("x1"), py::arg("x2"), py::arg("v"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](const CircuitParams& p) { return TrainConfig::defaults(p); }), py::arg("p"))
      .def_readwrite("dt", &TrainConfig::dt)
      .def_readwrite("n_samples", &TrainConfig::n_samples)
      .def_readwrite("tau", &TrainConfig::tau)
      .def_readwrite("v", &TrainConfig::v)
      .def_readwrite("x0", &TrainConfig::x0)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("max_evals", &TrainConfig::max_evals)
      .def_readwrite("step_scale", &TrainConfig::step_scale)
      .def_readwrite("u_max", &TrainConfig::u_max)
      .def_readwrite("patience", &TrainConfig::patience);

  m.def("performance_index",
        [](const CircuitParams& p, const TrainConfig& cfg, const std::string& family,
           const std::vector<double>& params) {
          const auto fam = family_from(family, params.size() / 4);
          return performance_index(p, cfg, fam.make(params));
        },
        py::arg("p"), py::arg("cfg"), py::arg("family"), py::arg("params"));
  m.def("random_init", [](const std::string& family, std::size_t n_hidden, std::uint64_t seed) {
    return random_init(family_from(family, n_hidden), seed);
  }, py::arg("family"), py::arg("n_hidden") = 8, py::arg("seed") = 1);
  m.def("train",
        [](const CircuitParams& p, const TrainConfig& cfg, const std::string& family,
           const std::vector<double>& init) {
          TrainResult res;
          {
            py::gil_scoped_release release;
            res = train(p, cfg, family_from(family, init.size() / 4), init);
          }
          std::vector<double> history;
          history.reserve(res.log.size());
          for (const auto& e : res.log) history.push_back(e.J_best);
          return py::make_tuple(res.best, res.J_best, to_array(history));
        },
        py::arg("p"), py::arg("cfg"), py::arg("family"), py::arg("init"),
        "Returns (best parameters, best J, best-so-far J per evaluation).");

  m.def("run_scenario",
        [](const std::filesystem::path& path, std::optional<std::uint64_t> seed,
           std::optional<std::filesystem::path> out) {
          RunOptions opt;
          opt.seed = seed;
          opt.out = std::move(out);
          const auto r = run_scenario(path, opt);
          return py::make_tuple(r.exit_code, r.message, r.files);
        },
        py::arg("path"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
        "Returns (exit code, message, written files).");
}
