#include <map>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liqlab/analysis/survival.hpp"
#include "liqlab/lab/commands.hpp"
#include "liqlab/lab/config.hpp"
#include "liqlab/spread_models.hpp"
#include "liqlab/theory.hpp"

namespace py = pybind11;
using namespace liqlab;

namespace {

spread::Params spread_params(const std::string& variant, double lambda0_plus, double lambda0_minus, double alpha,
                             double beta, double epsilon, double horizon, int sample_points, double measure_from,
                             std::uint64_t seed, std::uint64_t stream, std::uint64_t max_events) {
  spread::Params p;
  p.variant = spread::variant_from_string(variant);
  p.lambda0_plus = lambda0_plus;
  p.lambda0_minus = lambda0_minus;
  p.alpha = alpha;
  p.beta = beta;
  p.epsilon = epsilon;
  p.horizon = horizon;
  p.sample_points = sample_points;
  p.measure_from = measure_from;
  p.seed = seed;
  p.stream = stream;
  p.max_events = max_events;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "liqlab native core";
  m.attr("version") = lab::kToolkitVersion;

  m.def("theory_json", [](const std::string& model, const std::map<std::string, double>& params) {
    return lab::cmd_theory(lab::model_from_string(model), params).dump();
  });

  m.def("first_passage_prob", [](double N, double T, double V, double D) {
    return theory::first_passage_prob(N, T, V, D);
  }, py::arg("N"), py::arg("T"), py::arg("V"), py::arg("D"));

  m.def("chi_theory", [](double alpha, double T, double N, double lambda0_plus, double lambda0_minus) {
    return theory::chi_theory(alpha, T, N, lambda0_plus, lambda0_minus);
  }, py::arg("alpha"), py::arg("T"), py::arg("N"), py::arg("lambda0_plus") = 0.5, py::arg("lambda0_minus") = 1.0);

  py::class_<spread::SpreadPath>(m, "SpreadPath")
      .def_readonly("sample_times", &spread::SpreadPath::sample_times)
      .def_readonly("spread_samples", &spread::SpreadPath::spread_samples)
      .def_readonly("x_samples", &spread::SpreadPath::x_samples)
      .def_readonly("mid_samples", &spread::SpreadPath::mid_samples)
      .def_readonly("escape_time", &spread::SpreadPath::escape_time)
      .def_readonly("aborted", &spread::SpreadPath::aborted)
      .def_readonly("n_plus", &spread::SpreadPath::n_plus)
      .def_readonly("n_minus", &spread::SpreadPath::n_minus)
      .def_readonly("final_time", &spread::SpreadPath::final_time)
      .def_readonly("final_spread", &spread::SpreadPath::final_spread)
      .def_readonly("max_spread", &spread::SpreadPath::max_spread)
      .def_readonly("spread_occupation", &spread::SpreadPath::spread_occupation)
      .def_readonly("realized_price_variance", &spread::SpreadPath::realized_price_variance);

  m.def("run_spread", [](const std::string& variant, double lambda0_plus, double lambda0_minus, double alpha,
                         double beta, double epsilon, double horizon, int sample_points, double measure_from,
                         std::uint64_t seed, std::uint64_t stream, std::uint64_t max_events) {
    const auto p = spread_params(variant, lambda0_plus, lambda0_minus, alpha, beta, epsilon, horizon, sample_points,
                                 measure_from, seed, stream, max_events);
    p.validate();
    py::gil_scoped_release release;
    return spread::run_spread(p);
  }, py::arg("variant") = "linear", py::arg("lambda0_plus") = 0.5, py::arg("lambda0_minus") = 1.0,
     py::arg("alpha") = 0.0, py::arg("beta") = 1.0, py::arg("epsilon") = 0.0, py::arg("horizon") = 100.0,
     py::arg("sample_points") = 0, py::arg("measure_from") = 0.0, py::arg("seed") = 0, py::arg("stream") = 0,
     py::arg("max_events") = 100'000'000);

  py::class_<analysis::Ccdf>(m, "Ccdf")
      .def_readonly("support", &analysis::Ccdf::support)
      .def_readonly("survival", &analysis::Ccdf::survival)
      .def_readonly("mass", &analysis::Ccdf::mass)
      .def_readonly("total_weight", &analysis::Ccdf::total_weight)
      .def_readonly("effective_n", &analysis::Ccdf::effective_n)
      .def("at", &analysis::Ccdf::at);

  m.def("empirical_sf", [](const std::vector<double>& samples, const std::vector<double>& weights) {
    return analysis::empirical_sf(samples, weights);
  }, py::arg("samples"), py::arg("weights") = std::vector<double>{});

  py::class_<analysis::GeometricFit>(m, "GeometricFit")
      .def_readonly("r", &analysis::GeometricFit::r)
      .def_readonly("r_se", &analysis::GeometricFit::r_se)
      .def_readonly("p_at_min", &analysis::GeometricFit::p_at_min)
      .def_readonly("n_tail", &analysis::GeometricFit::n_tail);
  m.def("fit_geometric", &analysis::fit_geometric, py::arg("ccdf"), py::arg("min_support") = 2.0);

  m.def("simulate_rows", [](const std::string& config_json) {
    auto c = lab::config_from_json(nlohmann::json::parse(config_json));
    c.validate();
    lab::SimulationOutput out;
    {
      py::gil_scoped_release release;
      out = lab::simulate_rows(c);
    }
    const auto& names = lab::model_parameters(c.model);
    py::list rows;
    for (const auto& r : out.rows) {
      py::dict d;
      for (std::size_t i = 0; i < names.size(); ++i) d[py::str(names[i].first)] = r.params[i];
      d["seed"] = r.seed;
      d["stream_id"] = r.stream_id;
      d["tau_c"] = r.tau_c ? py::object(py::float_(*r.tau_c)) : py::object(py::none());
      d["max_spread"] = r.max_spread;
      d["n_events"] = r.n_events;
      d["realized_var"] = r.realized_var;
      d["aborted"] = r.aborted;
      rows.append(d);
    }
    return rows;
  }, py::arg("config_json"));

  m.def("config_hash", [](const std::string& config_json) {
    return lab::config_hash(lab::config_from_json(nlohmann::json::parse(config_json)));
  });

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });
}
