#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "llbtoc/error.hpp"
#include "llbtoc/run_config.hpp"
#include "llbtoc/snapshot.hpp"

namespace py = pybind11;
using namespace llbtoc;

namespace {

py::exception<Error>* error_type = nullptr;

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

/// (cells, 3) array of a field, cells in storage order (axis 0 fastest).
Array to_array(const VectorField& f) {
  Array a({static_cast<py::ssize_t>(f.size()), py::ssize_t{3}});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < f.size(); ++i) {
    v(i, 0) = f[i].x;
    v(i, 1) = f[i].y;
    v(i, 2) = f[i].z;
  }
  return a;
}

VectorField from_array(const Grid& g, const Array& a) {
  require(a.ndim() == 2 && a.shape(1) == 3 && static_cast<std::size_t>(a.shape(0)) == g.size(),
          ErrorKind::invalid_argument, "expected an array of shape (cells, 3)");
  auto v = a.unchecked<2>();
  std::vector<Vec3> values(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) values[i] = {v(i, 0), v(i, 1), v(i, 2)};
  return VectorField(g, std::move(values));
}

Array frames_array(const std::vector<VectorField>& frames) {
  const auto n = static_cast<py::ssize_t>(frames.empty() ? 0 : frames.front().size());
  Array a({static_cast<py::ssize_t>(frames.size()), n, py::ssize_t{3}});
  auto v = a.mutable_unchecked<3>();
  for (std::size_t k = 0; k < frames.size(); ++k)
    for (py::ssize_t i = 0; i < n; ++i) {
      v(k, i, 0) = frames[k][i].x;
      v(k, i, 1) = frames[k][i].y;
      v(k, i, 2) = frames[k][i].z;
    }
  return a;
}

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ControlTrajectory control_from(const Grid& g, std::vector<double> times, const std::vector<Array>& frames) {
  std::vector<VectorField> f;
  for (const auto& a : frames) f.push_back(from_array(g, a));
  return ControlTrajectory(std::move(times), std::move(f));
}

py::dict history_dict(const std::vector<IterationRecord>& h) {
  std::vector<double> J, grad, T, viol;
  for (const auto& r : h) {
    J.push_back(r.J);
    grad.push_back(r.grad_norm);
    T.push_back(r.T);
    viol.push_back(r.constraint_violation);
  }
  py::dict d;
  d["J"] = J;
  d["grad_norm"] = grad;
  d["T"] = T;
  d["constraint_violation"] = viol;
  return d;
}

}  // namespace

PYBIND11_MODULE(_llbtoc, m) {
  m.doc() = "Time-optimal control of the Landau-Lifshitz-Bloch equation";
  m.attr("__version__") = kVersion;

  // Never destroyed: the translator may run during interpreter shutdown.
  error_type = new py::exception<Error>(m, "LlbtocError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type->ptr())(std::string(to_string(e.kind())) + ": " + e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error_type->ptr(), exc.ptr());
    }
  });

  py::class_<Grid>(m, "Grid")
      .def(py::init([](int dim, std::vector<int> cells, std::vector<double> extent) {
             return make_grid(dim, cells, extent);
           }),
           py::arg("dim"), py::arg("cells"), py::arg("extent"))
      .def_readonly("dim", &Grid::dim)
      .def_property_readonly("cells", [](const Grid& g) { return std::vector<int>(g.cells.begin(), g.cells.begin() + g.dim); })
      .def_property_readonly("extent",
                             [](const Grid& g) { return std::vector<double>(g.extent.begin(), g.extent.begin() + g.dim); })
      .def("size", &Grid::size)
      .def("centers", [](const Grid& g) {
        Array a({static_cast<py::ssize_t>(g.size()), py::ssize_t{g.dim}});
        auto v = a.mutable_unchecked<2>();
        for (std::size_t i = 0; i < g.size(); ++i)
          for (int d = 0; d < g.dim; ++d) v(i, d) = g.center(i)[d];
        return a;
      });

  py::class_<VectorField>(m, "VectorField")
      .def(py::init([](const Grid& g, const Array& a) { return from_array(g, a); }))
      .def_static("constant", [](const Grid& g, std::array<double, 3> c) { return VectorField(g, Vec3{c[0], c[1], c[2]}); })
      .def_property_readonly("grid", &VectorField::grid)
      .def("to_numpy", &to_array)
      .def("l2_norm", [](const VectorField& f) { return l2_norm(f); });

  py::class_<ControlTrajectory>(m, "Control")
      .def(py::init([](const Grid& g, std::vector<double> times, const std::vector<Array>& frames) {
             return control_from(g, std::move(times), frames);
           }),
           py::arg("grid"), py::arg("times"), py::arg("frames"))
      .def_static("zeros", [](const Grid& g, double horizon, int intervals) {
        return ControlTrajectory::constant(g, horizon, intervals);
      })
      .def_property_readonly("times", &ControlTrajectory::times)
      .def("frames", [](const ControlTrajectory& u) { return frames_array(u.frames()); })
      .def("__add__", [](const ControlTrajectory& a, const ControlTrajectory& b) { return a + b; })
      .def("__sub__", [](const ControlTrajectory& a, const ControlTrajectory& b) { return a - b; })
      .def("__rmul__", [](const ControlTrajectory& a, double s) { return s * a; })
      .def("__mul__", [](const ControlTrajectory& a, double s) { return s * a; });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("horizon", &SolverConfig::horizon)
      .def_readwrite("cg_tol", &SolverConfig::cg_tol)
      .def_readwrite("blowup_cap", &SolverConfig::blowup_cap);

  py::class_<Problem>(m, "Problem")
      .def(py::init([](const VectorField& m0, const VectorField& m_omega, double delta, const SolverConfig& cfg,
                       const std::string& mode) {
             Problem p(m0, TargetSpec{m_omega, delta}, cfg);
             require(mode == "discrete" || mode == "continuous", ErrorKind::invalid_argument,
                     "mode must be discrete or continuous");
             p.mode = mode == "discrete" ? AdjointMode::discrete : AdjointMode::continuous;
             return p;
           }),
           py::arg("m0"), py::arg("m_omega"), py::arg("delta"), py::arg("solver"), py::arg("mode") = "discrete")
      .def_property_readonly("delta", [](const Problem& p) { return p.target.delta; })
      .def_property_readonly("solver", [](const Problem& p) { return p.solver; });

  m.def("simulate", [](const Problem& p, const ControlTrajectory& u) {
    const StateTrajectory s = simulate(p.m0, u, p.solver);
    return py::make_tuple(s.times, frames_array(s.frames));
  });

  m.def("hitting_time", [](const Problem& p, const ControlTrajectory& u) -> py::object {
    const StateTrajectory s = simulate(p.m0, u, p.solver);
    const auto hit = hitting_time(s, p.target);
    if (!hit) return py::none();
    return py::float_(hit->time);
  });

  m.def("cost", [](const Problem& p, const ControlTrajectory& u) {
    const CostBreakdown c = cost(u, p);
    py::dict d;
    d["t_star"] = c.t_star;
    d["time_term"] = c.time_term;
    d["control_term"] = c.control_term;
    d["total"] = c.total;
    return d;
  });

  m.def("gradient", [](const Problem& p, const ControlTrajectory& u) {
    const Evaluation ev = evaluate(u, p);
    const AdjointTrajectory phi = solve_adjoint(ev.state, ev.hp, p.transversality_eps);
    return py::make_tuple(ev.cost.total, riesz_gradient(phi, u, p.metric, p.gram_tol));
  });

  m.def("inner_U", [](const Problem& p, const ControlTrajectory& a, const ControlTrajectory& b) {
    return inner_U(a, b, p.metric);
  });

  m.def(
      "optimize",
      [](const Problem& p, const ControlTrajectory& u, const std::string& mode, double grad_tol, int max_iters) {
        OptimizeConfig cfg;
        cfg.mode = mode == "penalty" ? OptimizeMode::penalty : OptimizeMode::reduced;
        require(mode == "penalty" || mode == "reduced", ErrorKind::invalid_argument, "mode must be reduced or penalty");
        cfg.grad_tol = grad_tol;
        cfg.max_iters = max_iters;
        const OptimizeResult r = optimize(p, u, cfg);
        py::dict d;
        d["u"] = r.u;
        d["T"] = r.T;
        d["converged"] = r.converged;
        d["message"] = r.message;
        d["history"] = history_dict(r.history);
        d["log_csv"] = iteration_log_csv(r.history);
        d["report"] = r.has_report ? json_to_py(to_json(r.report)) : py::none();
        return d;
      },
      py::arg("problem"), py::arg("u"), py::arg("mode") = "reduced", py::arg("grad_tol") = 1e-6,
      py::arg("max_iters") = 200);

  m.def("check_optimality", [](const Problem& p, const ControlTrajectory& u) {
    return json_to_py(to_json(check_optimality(u, p, OptimizeConfig{})));
  });

  m.def(
      "taylor_sweep",
      [](const std::string& kind, const Problem& p, const ControlTrajectory& u, const ControlTrajectory& h,
         std::vector<double> rho) { return json_to_py(to_json(taylor_sweep(parse_sweep_kind(kind), p, u, h, rho))); },
      py::arg("kind"), py::arg("problem"), py::arg("u"), py::arg("h"), py::arg("rho") = default_rho());

  m.def("radial_oracle", &radial_oracle, py::arg("s0"), py::arg("t"));
  m.def("radial_oracle_inverse", &radial_oracle_inverse, py::arg("s0"), py::arg("s"));

  m.def(
      "spectral_simulate_1d",
      [](const Grid& g, const std::function<std::array<double, 3>(double)>& m0, double T, int modes, double dt) {
        SpectralConfig cfg;
        cfg.modes = modes;
        cfg.dt = dt;
        cfg.length = g.extent[0];
        const InitialProfile f = [&](double x) {
          const auto v = m0(x);
          return Vec3{v[0], v[1], v[2]};
        };
        const StateTrajectory s = spectral_simulate_1d(g, f, [](double, double) { return Vec3{}; }, T, cfg);
        return py::make_tuple(s.times, frames_array(s.frames));
      },
      py::arg("grid"), py::arg("m0"), py::arg("T"), py::arg("modes") = 32, py::arg("dt") = 1e-4);

  m.def("write_snapshot", [](const std::filesystem::path& p, const VectorField& f) { write_snapshot(p, f); });
  m.def("read_snapshot", [](const std::filesystem::path& p) { return read_snapshot(p).field; });
  m.def("read_control", &read_control);
  m.def("write_control", &write_control);

  m.def("load_config", [](const std::filesystem::path& p) {
    const RunConfig rc = load_run_config(p);
    return py::make_tuple(rc.problem(), rc.control, rc.direction);
  });
}
