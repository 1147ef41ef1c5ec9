#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bintopo/core/design.hpp"
#include "bintopo/core/environment.hpp"
#include "bintopo/core/errors.hpp"
#include "bintopo/core/params.hpp"
#include "bintopo/core/run.hpp"
#include "bintopo/env/gol.hpp"
#include "bintopo/env/photonics.hpp"
#include "bintopo/harness/experiment.hpp"
#include "bintopo/optim/registry.hpp"

namespace py = pybind11;
using namespace bintopo;

namespace {

using Bits = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

// Arrays are indexed [z, y, x] (2D: [y, x]), matching the x-fastest layout.
Design to_design(const Bits& a) {
  const auto r = a.request();
  GridShape shape;
  if (r.ndim == 1) {
    shape = GridShape(static_cast<int>(r.shape[0]), 1, 1);
  } else if (r.ndim == 2) {
    shape = GridShape(static_cast<int>(r.shape[1]), static_cast<int>(r.shape[0]), 1);
  } else if (r.ndim == 3) {
    shape = GridShape(static_cast<int>(r.shape[2]), static_cast<int>(r.shape[1]), static_cast<int>(r.shape[0]));
  } else {
    throw ShapeMismatch("designs are 1D, 2D or 3D arrays");
  }
  const auto* p = static_cast<const std::uint8_t*>(r.ptr);
  std::vector<std::uint8_t> bits(p, p + r.size);
  for (auto& b : bits) {
    if (b > 1) throw ConfigError("design entries must be 0 or 1");
  }
  return Design(shape, std::move(bits));
}

// Reshapes a flat array to `shape` when its size matches.
Design to_design(const Bits& a, const GridShape& shape) {
  Design d = to_design(a);
  if (d.shape() == shape) return d;
  if (d.size() != shape.size()) {
    throw ShapeMismatch("design has " + std::to_string(d.size()) + " entries, environment expects " +
                        to_string(shape));
  }
  return Design(shape, std::vector<std::uint8_t>(d.bits().begin(), d.bits().end()));
}

py::array_t<std::uint8_t> to_array(const Design& d) {
  const auto& s = d.shape();
  std::vector<py::ssize_t> dims;
  if (s.nz > 1) dims.push_back(s.nz);
  if (s.ny > 1 || s.nz > 1) dims.push_back(s.ny);
  dims.push_back(s.nx);
  py::array_t<std::uint8_t> out(dims);
  std::copy(d.bits().begin(), d.bits().end(), out.mutable_data());
  return out;
}

struct PyEnvironment {
  std::shared_ptr<PayoffEnvironment> env;

  const PhotonicEnvBase* photonic() const { return dynamic_cast<const PhotonicEnvBase*>(env.get()); }
};

py::dict run_result(const RunResult& r, bool designs) {
  py::array_t<double> trace({static_cast<py::ssize_t>(r.trace.size()), py::ssize_t{3}});
  auto t = trace.mutable_unchecked<2>();
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto k = static_cast<py::ssize_t>(i);
    t(k, 0) = static_cast<double>(r.trace[i].step);
    t(k, 1) = r.trace[i].payoff;
    t(k, 2) = r.trace[i].best_so_far;
  }
  py::dict out;
  out["best_payoff"] = r.best_payoff;
  out["best"] = to_array(r.best);
  out["evaluations"] = r.evaluations;
  out["trace"] = trace;
  if (designs) {
    py::list ds;
    for (const auto& d : r.designs) ds.append(to_array(d));
    out["designs"] = ds;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of bintopo";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<LengthMismatch>(m, "LengthMismatch", base.ptr());
  py::register_exception<IndexOutOfRange>(m, "IndexOutOfRange", base.ptr());
  py::register_exception<EmptyBuffer>(m, "EmptyBuffer", base.ptr());
  py::register_exception<IncompatibleAlgorithm>(m, "IncompatibleAlgorithm", base.ptr());
  py::register_exception<NotSteadyState>(m, "NotSteadyState", base.ptr());
  py::register_exception<SimulationDiverged>(m, "SimulationDiverged", base.ptr());
  py::register_exception<InsufficientHistory>(m, "InsufficientHistory", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::class_<PyEnvironment>(m, "Environment")
      .def_property_readonly("name", [](const PyEnvironment& e) { return e.env->name(); })
      .def_property_readonly("shape",
                             [](const PyEnvironment& e) {
                               const auto s = e.env->shape();
                               return py::make_tuple(s.nx, s.ny, s.nz);
                             })
      .def_property_readonly("agent_count", [](const PyEnvironment& e) { return e.env->agent_count(); })
      .def_property_readonly("differentiable", [](const PyEnvironment& e) { return e.env->differentiable(); })
      .def(
          "evaluate",
          [](const PyEnvironment& e, const Bits& d) {
            const Design design = to_design(d, e.env->shape());
            py::gil_scoped_release release;
            return e.env->evaluate(design);
          },
          py::arg("design"))
      .def(
          "project", [](const PyEnvironment& e, const Bits& d) { return to_array(e.env->project(to_design(d, e.env->shape()))); },
          py::arg("design"))
      .def("relaxed_payoff", [](const PyEnvironment& e, const std::vector<double>& p) { return e.env->relaxed_payoff(p); })
      .def("relaxed_gradient",
           [](const PyEnvironment& e, const std::vector<double>& p) { return e.env->relaxed_gradient(p); })
      .def(
          "fractions",
          [](const PyEnvironment& e, const Bits& d) {
            const auto* ph = e.photonic();
            if (!ph) throw ConfigError("fractions needs a photonic environment");
            const Design design = to_design(d, e.env->shape());
            py::gil_scoped_release release;
            return ph->fractions(design);
          },
          py::arg("design"));

  m.def(
      "make_environment",
      [](const std::string& name, const std::map<std::string, std::string>& params) {
        Params p(params, "environment");
        PyEnvironment e{std::shared_ptr<PayoffEnvironment>(make_environment(name, p))};
        p.finish();
        return e;
      },
      py::arg("name"), py::arg("params") = std::map<std::string, std::string>{});

  m.def("optimizer_names", &optimizer_names);

  m.def(
      "run",
      [](const PyEnvironment& env, const std::string& algorithm, std::size_t budget, std::uint64_t seed,
         const std::map<std::string, std::string>& params, bool record_designs) {
        Params p(params, "algorithm");
        auto algo = make_optimizer(algorithm, p);
        p.finish();
        RunResult r;
        {
          py::gil_scoped_release release;
          RunOptions o;
          o.record_designs = record_designs;
          r = run_optimization(*env.env, *algo, Budget{budget}, seed, o);
        }
        return run_result(r, record_designs);
      },
      py::arg("env"), py::arg("algorithm"), py::arg("budget"), py::arg("seed") = 0,
      py::arg("params") = std::map<std::string, std::string>{}, py::arg("record_designs") = false);

  m.def(
      "run_experiment",
      [](const std::string& path, std::size_t budget, const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
         long long jobs, bool write) {
        ExperimentConfig cfg = load_experiment(path);
        if (budget > 0) cfg.budget = budget;
        if (!seeds.empty()) cfg.seeds = seeds;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (jobs >= 0) cfg.jobs = static_cast<std::size_t>(jobs);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = write ? run_experiment(cfg) : run_seeds(cfg);
        }
        py::list per_seed;
        for (const auto& s : r.seeds) {
          py::dict d;
          d["seed"] = s.seed;
          d["best_payoff"] = s.best_payoff;
          d["best"] = to_array(s.best);
          d["evaluations"] = s.evaluations;
          d["variance"] = s.variance;
          d["robustness"] = s.robustness;
          per_seed.append(d);
        }
        py::dict out;
        out["mean"] = r.mean;
        out["std"] = r.std;
        out["seeds"] = per_seed;
        return out;
      },
      py::arg("path"), py::arg("budget") = 0, py::arg("seeds") = std::vector<std::uint64_t>{},
      py::arg("out_dir") = "", py::arg("jobs") = -1, py::arg("write") = false);

  m.def(
      "gol_step", [](const Bits& grid) { return to_array(gol_step(to_design(grid))); }, py::arg("grid"));

  m.def(
      "apply_fabrication",
      [](const Bits& d, const std::string& anchor) {
        return to_array(apply_fabrication(to_design(d), FabricationConstraint::parse("connected-no-cavities", anchor)));
      },
      py::arg("design"), py::arg("anchor") = "bottom");

  m.def("splitter_objective", [](const std::vector<double>& measured, const std::vector<double>& targets) {
    return splitter_objective(measured, targets);
  });

  m.def(
      "design_variance",
      [](const std::vector<Bits>& designs, std::size_t window) {
        std::vector<Design> ds;
        ds.reserve(designs.size());
        for (const auto& d : designs) ds.push_back(to_design(d));
        return design_variance(ds, window);
      },
      py::arg("designs"), py::arg("window"));

  m.def("load_pbd", [](const std::string& path) { return to_array(load_pbd(path)); });
  m.def(
      "save_pbd", [](const std::string& path, const Bits& d) { save_pbd(path, to_design(d)); }, py::arg("path"),
      py::arg("design"));
}
