#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flockmeter/config.hpp"
#include "flockmeter/dynamics.hpp"
#include "flockmeter/error.hpp"
#include "flockmeter/experiments.hpp"
#include "flockmeter/measures.hpp"
#include "flockmeter/report_io.hpp"
#include "flockmeter/theory.hpp"

namespace py = pybind11;
using namespace flockmeter;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

CommunicationRate rate_of(double gamma) { return validate_rate(RateSpec::gamma_family(gamma)); }

std::pair<std::size_t, std::vector<double>> rows(const Array& a, const char* what) {
  if (a.ndim() != 2) throw InvalidArgument(std::string(what) + " must be a 2-d array of shape (n, d)");
  return {static_cast<std::size_t>(a.shape(1)), std::vector<double>(a.data(), a.data() + a.size())};
}

Array to_array(const std::vector<double>& flat, std::vector<py::ssize_t> shape) {
  Array out(shape);
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

theory::StabVariant variant_of(const std::string& v) {
  if (v == "paper-explicit") return theory::StabVariant::PaperExplicit;
  if (v == "tight") return theory::StabVariant::Tight;
  throw InvalidArgument("variant must be 'paper-explicit' or 'tight'");
}

py::dict simulate(const Array& x, const Array& v, double K, double gamma, double dt, std::size_t n_steps,
                  std::size_t record_every) {
  auto [d, xs] = rows(x, "x");
  auto [dv, vs] = rows(v, "v");
  if (d != dv) throw InvalidArgument("x and v must have the same shape");
  const ParticleEnsemble init(d, std::move(xs), std::move(vs));
  Trajectory traj = [&] {
    py::gil_scoped_release unlocked;
    return dynamics::simulate(init, ModelParams(K, rate_of(gamma)), dt, n_steps, record_every);
  }();
  const auto n = static_cast<py::ssize_t>(traj.states.size());
  const auto J = static_cast<py::ssize_t>(init.count());
  std::vector<double> px, pv, dx, dvv;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    px.insert(px.end(), traj.states[k].positions().begin(), traj.states[k].positions().end());
    pv.insert(pv.end(), traj.states[k].velocities().begin(), traj.states[k].velocities().end());
    dx.push_back(traj.diameters[k].x);
    dvv.push_back(traj.diameters[k].v);
  }
  py::dict out;
  out["times"] = to_array(traj.times(), {n});
  out["x"] = to_array(px, {n, J, static_cast<py::ssize_t>(d)});
  out["v"] = to_array(pv, {n, J, static_cast<py::ssize_t>(d)});
  out["D_X"] = to_array(dx, {n});
  out["D_V"] = to_array(dvv, {n});
  out["warnings"] = traj.warnings;
  return out;
}

py::tuple w2(const Array& p, const Array& q, std::size_t size_cap, bool brute_force) {
  auto [dp, ps] = rows(p, "p");
  auto [dq, qs] = rows(q, "q");
  const EmpiricalMeasure mu(dp, std::move(ps)), nu(dq, std::move(qs));
  AssignmentResult r;
  {
    py::gil_scoped_release unlocked;
    r = brute_force ? measures::w2_bruteforce(mu, nu) : measures::w2(mu, nu, size_cap);
  }
  return py::make_tuple(r.cost, r.permutation);
}

py::dict run_experiment(const std::string& kind, const std::string& config_json, double perturbation,
                        std::size_t threads) {
  const auto config = config::from_json_text(config_json);
  ExperimentReport report;
  {
    py::gil_scoped_release unlocked;
    const MonteCarloOptions options{threads, false};
    if (kind == "coupling") {
      report = experiments::run_coupling(config, options);
    } else if (kind == "w2rate") {
      report = experiments::run_w2_rate(config, options);
    } else if (kind == "stability") {
      report = experiments::run_stability(config, perturbation, options);
    } else if (kind == "telescope") {
      report = experiments::run_telescope(config, options);
    } else {
      throw InvalidArgument("unknown experiment '" + kind + "'");
    }
  }
  py::dict series;
  for (const auto& s : report.series) {
    py::dict entry;
    entry["mean"] = s.mean;
    entry["stderr"] = s.stderr_;
    series[py::make_tuple(s.name, s.J)] = entry;
  }
  py::dict out;
  out["kind"] = report.kind;
  out["times"] = report.times;
  out["series"] = series;
  out["scalars"] = report.scalars;
  out["replicate_values"] = report.replicate_values;
  out["notes"] = report.notes;
  out["csv"] = report_io::to_csv(report);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cucker-Smale particle simulation, mean-field constants and exact empirical W2";
  m.attr("__version__") = FLOCKMETER_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FlockingViolated>(m, "FlockingViolated", PyExc_ArithmeticError);
  py::register_exception<NumericalBlowUp>(m, "NumericalBlowUp", PyExc_ArithmeticError);
  py::register_exception<SizeCapExceeded>(m, "SizeCapExceeded", PyExc_ValueError);

  m.def("lipschitz", [](double gamma) { return rate_of(gamma).lipschitz(); }, py::arg("gamma"));
  m.def("tail_integral", [](double gamma, double a, double b) { return theory::tail_integral(rate_of(gamma), a, b); },
        py::arg("gamma"), py::arg("a"), py::arg("b"));
  m.def("flocking_condition",
        [](double K, double dx0, double dv0, double gamma) {
          return theory::flocking_condition(K, dx0, dv0, rate_of(gamma));
        },
        py::arg("K"), py::arg("dx0"), py::arg("dv0"), py::arg("gamma") = 0.5);
  m.def("x_infinity",
        [](double K, double dx0, double dv0, double gamma, bool bisection) {
          return theory::x_infinity(K, dx0, dv0, rate_of(gamma),
                                    bisection ? theory::RootMethod::Bisection : theory::RootMethod::Auto);
        },
        py::arg("K"), py::arg("dx0"), py::arg("dv0"), py::arg("gamma") = 0.5, py::arg("bisection") = false);
  m.def("c_mf", &theory::c_mf, py::arg("K"), py::arg("lipschitz"), py::arg("dbar_v0"));
  m.def("c_stab",
        [](double K, double dx0, double dv0, double dtilde_v0, double gamma, const std::string& variant) {
          return theory::c_stab(K, dx0, dv0, dtilde_v0, rate_of(gamma), variant_of(variant));
        },
        py::arg("K"), py::arg("dx0"), py::arg("dv0"), py::arg("dtilde_v0"), py::arg("gamma") = 0.5,
        py::arg("variant") = "paper-explicit");
  m.def("simulate", &simulate, py::arg("x"), py::arg("v"), py::arg("K") = 5.0, py::arg("gamma") = 0.5,
        py::arg("dt") = 0.05, py::arg("n_steps") = 200, py::arg("record_every") = 1);
  m.def("w2", &w2, py::arg("p"), py::arg("q"), py::arg("size_cap") = measures::kDefaultSizeCap,
        py::arg("brute_force") = false, "Squared W2 cost and optimal matching between equal-weight point clouds.");
  m.def("run_experiment", &run_experiment, py::arg("kind"), py::arg("config_json") = "{}",
        py::arg("perturbation") = 0.01, py::arg("threads") = 0);
  m.def("default_config_json", [] { return config::to_json_text(ExperimentConfig{}); });
}
