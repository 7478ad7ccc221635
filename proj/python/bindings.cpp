#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "taylorcert/certificates.hpp"
#include "taylorcert/errors.hpp"
#include "taylorcert/experiment.hpp"
#include "taylorcert/sampler.hpp"

namespace py = pybind11;
using namespace taylorcert;

namespace {

AggregateMode parse_mode(const std::string& mode) {
  if (mode == "approx") return AggregateMode::Approx;
  if (mode == "true") return AggregateMode::True;
  if (mode == "approx_zero_k1") return AggregateMode::ApproxZeroK1;
  throw Error(ErrorKind::InvalidArgument, "unknown aggregate mode '" + mode + "'");
}

BoundConstants constants_of(double K, double K1, double F0) { return BoundConstants{K, K1, F0, {}}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Certified truncated-Taylor ODE integration (native core)";

  static py::handle error_type = py::exception<Error>(m, "TaylorCertError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      exc.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
        py::arg("config_json"), "Parse and validate a config; return it with every default filled in.");
  m.def(
      "run",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        cfg.validate();
        py::gil_scoped_release release;
        return run_report_json(run_experiment(cfg));
      },
      py::arg("config_json"));
  m.def(
      "certify",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        cfg.validate();
        py::gil_scoped_release release;
        return certify_report_json(certify_experiment(cfg));
      },
      py::arg("config_json"));
  m.def(
      "shadow",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        cfg.validate();
        py::gil_scoped_release release;
        return shadow_report_json(shadow_experiment(cfg));
      },
      py::arg("config_json"));
  m.def(
      "sweep",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        cfg.validate();
        py::gil_scoped_release release;
        const auto rows = sweep_experiment(cfg);
        return py::make_tuple(sweep_report_json(cfg, rows), sweep_csv(rows));
      },
      py::arg("config_json"), "Returns (report_json, summary_csv).");

  m.def(
      "aggregate",
      [](double K, double K1, double F0, int ell, const std::string& mode) {
        return compute_aggregate(constants_of(K, K1, F0), ell, parse_mode(mode));
      },
      py::arg("K"), py::arg("K1"), py::arg("F0"), py::arg("ell"), py::arg("mode") = "true");
  m.def(
      "h_bound",
      [](double A, int ell, double rho, std::size_t J) {
        const auto b = closed_form_h_bound_detail(A, ell, rho, J);
        py::dict d;
        d["saturation"] = b.saturation;
        d["accumulation"] = b.accumulation;
        d["printed"] = b.printed;
        d["solved"] = b.solved;
        d["value"] = b.value;
        return d;
      },
      py::arg("A"), py::arg("ell"), py::arg("rho"), py::arg("J"));
  m.def(
      "segment_growth",
      [](double K, double K1, int ell, double rho, double h) {
        return segment_growth(constants_of(K, K1, 0.0), ell, rho, h);
      },
      py::arg("K"), py::arg("K1"), py::arg("ell"), py::arg("rho"), py::arg("h"));
  m.def(
      "certify_unperturbed",
      [](double K, double K1, double F0, int ell, double rho, std::size_t J, double h, double e0) {
        return certificate_json(certify_unperturbed(constants_of(K, K1, F0), ell, rho, J, h, e0));
      },
      py::arg("K"), py::arg("K1"), py::arg("F0"), py::arg("ell"), py::arg("rho"), py::arg("J"), py::arg("h"),
      py::arg("e0") = 0.0);
  m.def(
      "certify_impulsive",
      [](double K, double K1, double F0, int ell, double rho, std::size_t J, double h,
         const std::vector<double>& gbar, double e0) {
        return certificate_json(certify_impulsive(constants_of(K, K1, F0), ell, rho, J, h, gbar, e0));
      },
      py::arg("K"), py::arg("K1"), py::arg("F0"), py::arg("ell"), py::arg("rho"), py::arg("J"), py::arg("h"),
      py::arg("gbar"), py::arg("e0") = 0.0);
  m.def(
      "certify_continuous",
      [](double K, double K1, double F0, int ell, double rho, std::size_t J, const std::vector<double>& h,
         const std::vector<double>& lambda, const std::vector<double>& gbar, double e0) {
        return certificate_json(certify_continuous(constants_of(K, K1, F0), ell, rho, J, h, lambda, gbar, e0));
      },
      py::arg("K"), py::arg("K1"), py::arg("F0"), py::arg("ell"), py::arg("rho"), py::arg("J"), py::arg("h"),
      py::arg("lam"), py::arg("gbar") = std::vector<double>{}, py::arg("e0") = 0.0);
}
