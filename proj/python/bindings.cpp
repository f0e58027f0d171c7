#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "del/bellman.hpp"
#include "del/cli.hpp"
#include "del/experiments.hpp"
#include "del/report.hpp"

namespace py = pybind11;
using namespace del;

namespace {

py::dict parameters(int k) {
  const WeightParams p = solve_parameters(k);
  const auto [r1, r2] = parameter_residuals(p);
  py::dict d;
  d["k"] = k;
  d["eps"] = rational_to_string(p.eps);
  d["tau_w"] = rational_to_string(p.tau_w);
  d["p"] = rational_to_string(p.p);
  d["residuals"] = py::make_tuple(rational_to_string(r1), rational_to_string(r2));
  return d;
}

// Leaves as (path, value) pairs; exact values are surd strings.
py::list weight(int k, int levels, const std::string& mode) {
  py::list out;
  if (parse_mode(mode) == Mode::kExact) {
    const auto aw = build_weight<QuadraticSurd>(make_params(k, levels));
    for (const auto& l : aw.weight.leaves()) {
      out.append(py::make_tuple(l.interval.path(), l.value.to_string()));
    }
  } else {
    const auto aw = build_weight<double>(make_params(k, levels));
    for (const auto& l : aw.weight.leaves()) {
      out.append(py::make_tuple(l.interval.path(), l.value));
    }
  }
  return out;
}

std::string a2_exact(int k, int levels) {
  return a2_check(build_weight<QuadraticSurd>(make_params(k, levels))).a2_exact;
}

std::string experiment(int k_min, int k_max, std::optional<int> levels, const std::string& suites, std::uint64_t seed) {
  SweepConfig c;
  c.k_min = k_min;
  c.k_max = k_max;
  c.levels = levels;
  c.suites = SuiteSet::parse(suites);
  c.seed = seed;
  py::gil_scoped_release release;
  return sweep_json(c, scaling_sweep(c)).dump();
}

py::dict main_inequality(double q, double k, double c_drift, std::size_t samples, std::uint64_t seed) {
  bellman::BellmanParams p;
  p.Q = q;
  p.K = k;
  p.c_drift = c_drift;
  bellman::MainInequalityReport r;
  {
    py::gil_scoped_release release;
    r = bellman::check_main_inequality(p, samples, seed);
  }
  py::dict d;
  d["samples"] = r.samples;
  d["violations"] = r.violations;
  d["worst_margin"] = r.worst_margin;
  return d;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_del, m) {
  m.doc() = "Dyadic extremal weights: exact construction, operators and Bellman checks";
  m.attr("__version__") = kVersion;
  m.def("parameters", &parameters, py::arg("k"), "exact eps, tau_w, p and the two residuals");
  m.def("weight", &weight, py::arg("k"), py::arg("levels"), py::arg("mode") = "exact",
        "leaves of the truncated weight as (path, value)");
  m.def("a2", &a2_exact, py::arg("k"), py::arg("levels"), "exact A2 characteristic as a rational string");
  m.def("phi", py::overload_cast<double>(&bellman::phi), py::arg("tau"),
        "e^{-t^2/2} int_0^t e^{s^2/2} ds");
  m.def("default_k", &bellman::default_k, py::arg("Q"), py::arg("a0") = 1.0);
  m.def("main_inequality", &main_inequality, py::arg("Q") = 10.0, py::arg("K") = 0.0, py::arg("c_drift") = 0.125,
        py::arg("samples") = 10000, py::arg("seed") = 0, "sampled check of the main inequality");
  m.def("experiment", &experiment, py::arg("k_min") = 2, py::arg("k_max") = 2, py::arg("levels") = std::nullopt,
        py::arg("suites") = "all", py::arg("seed") = 0, "experiment document as a JSON string");
  m.def("run_cli", &run_cli, py::arg("args"), "runs the command line and returns (code, stdout, stderr)");
}
