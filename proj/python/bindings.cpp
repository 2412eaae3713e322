#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psmcrb/bounds.hpp"
#include "psmcrb/config.hpp"
#include "psmcrb/csv.hpp"
#include "psmcrb/errors.hpp"
#include "psmcrb/estimators.hpp"
#include "psmcrb/montecarlo.hpp"
#include "psmcrb/pseudotrue.hpp"
#include "psmcrb/selfcheck.hpp"
#include "psmcrb/specfn.hpp"

namespace py = pybind11;
using namespace psmcrb;

namespace {

py::dict bound_dict(const BoundReport& r) {
  py::dict d;
  d["gamma"] = r.gamma_thr;
  d["p1"] = r.p1;
  d["p2"] = r.p2;
  py::dict per;
  for (auto i : kInterpretations) {
    const auto& b = r.of(i);
    py::dict e;
    e["total"] = b.total;
    e["trace"] = b.trace;
    e["bias_l1"] = b.bias_l1;
    e["branch_vanished"] = py::make_tuple(b.branch_vanished[0], b.branch_vanished[1]);
    py::list mcrb, vartheta;
    for (int k = 0; k < 2; ++k) {
      if (b.branch_vanished[k]) {
        mcrb.append(py::none());
        vartheta.append(py::none());
      } else {
        mcrb.append(b.mcrb[k]);
        vartheta.append(b.vartheta[k]);
      }
    }
    e["mcrb"] = mcrb;
    e["vartheta"] = vartheta;
    per[to_string(i)] = e;
  }
  d["interpretations"] = per;
  d["oracle_crb_trace"] = r.oracle_crb_trace;
  d["oracle_crb_true_model_trace"] = r.oracle_crb_true_model_trace;
  d["conventional_mcrb1_trace"] = r.conventional_mcrb1_trace;
  d["conventional_mcrb2_trace"] = r.conventional_mcrb2_trace;
  d["anti_oracle_mcrb_trace"] = r.anti_oracle_mcrb_trace;
  d["anti_oracle_bias_l1"] = r.anti_oracle_bias_l1;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Post-model-selection misspecified Cramer-Rao bounds for a linear Gaussian model";

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<DegenerateSelection>(m, "DegenerateSelection", numerical.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)domain;

  py::enum_<Hypothesis>(m, "Hypothesis").value("H1", Hypothesis::H1).value("H2", Hypothesis::H2);
  py::enum_<Interpretation>(m, "Interpretation")
      .value("NAIVE", Interpretation::Naive)
      .value("NORMALIZED", Interpretation::Normalized)
      .value("SELECTIVE", Interpretation::SelectiveInference);

  m.def("reg_lower_gamma", &specfn::reg_lower_gamma, py::arg("a"), py::arg("x"));
  m.def("chi2_cdf", [](int r, double g, double lam) { return specfn::chi2_cdf_noncentral({r, g, lam}); },
        py::arg("r"), py::arg("gamma"), py::arg("lam") = 0.0);
  m.def("chi2_survival", [](int r, double g, double lam) { return specfn::chi2_survival_noncentral({r, g, lam}); },
        py::arg("r"), py::arg("gamma"), py::arg("lam") = 0.0);
  m.def("chi2_cdf_dlambda", [](int r, double g, double lam) { return specfn::chi2_cdf_dlambda({r, g, lam}); },
        py::arg("r"), py::arg("gamma"), py::arg("lam"));
  m.def("chi2_cdf_d2lambda", [](int r, double g, double lam) { return specfn::chi2_cdf_d2lambda({r, g, lam}); },
        py::arg("r"), py::arg("gamma"), py::arg("lam"));

  py::class_<ModelGeometry>(m, "Geometry")
      .def(py::init(&build_geometry), py::arg("H"))
      .def_readonly("H", &ModelGeometry::H)
      .def_readonly("Hpinv", &ModelGeometry::Hpinv)
      .def_readonly("PH", &ModelGeometry::PH)
      .def_readonly("Pperp", &ModelGeometry::Pperp)
      .def_readonly("r", &ModelGeometry::r);

  m.def("glrt_statistic", &glrt_statistic, py::arg("x"), py::arg("geo"), py::arg("sigma2"));
  m.def("glrt_select", &glrt_select, py::arg("x"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));
  m.def("noncentrality", &noncentrality, py::arg("v"), py::arg("geo"), py::arg("sigma2"));
  m.def(
      "selection_probs",
      [](double lam, double g, int r) {
        const auto p = true_selection_probs(lam, g, r);
        return py::make_tuple(p.p1, p.p2);
      },
      py::arg("lam"), py::arg("gamma"), py::arg("r"));

  m.def("cond_mean", &cond_mean, py::arg("k"), py::arg("phi"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));
  m.def("cond_cov", &cond_cov, py::arg("k"), py::arg("phi"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));

  m.def("msl", [](const Vec& x, int k, const ModelGeometry& geo) { return msl(x, k, geo).theta; },
        py::arg("x"), py::arg("k"), py::arg("geo"));
  m.def(
      "msnl",
      [](const Vec& x, int k, const ModelGeometry& geo, double s2, double g) { return msnl(x, k, geo, s2, g).theta; },
      py::arg("x"), py::arg("k"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));
  m.def(
      "psml",
      [](const Vec& x, int k, const ModelGeometry& geo, double s2, double g) { return psml(x, k, geo, s2, g).theta; },
      py::arg("x"), py::arg("k"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));
  m.def("oracle_ml", &oracle_ml, py::arg("x"), py::arg("truth"), py::arg("geo"));

  m.def(
      "pseudo_true",
      [](Interpretation i, int k, const Vec& phi, const ModelGeometry& geo, double s2, double g) {
        return pseudo_true(i, k, phi, geo, s2, g).vartheta;
      },
      py::arg("interpretation"), py::arg("k"), py::arg("phi"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));

  m.def(
      "bounds",
      [](const Vec& phi, Hypothesis truth, const ModelGeometry& geo, double s2, double g) {
        return bound_dict(compute_bounds(phi, truth, geo, s2, g));
      },
      py::arg("phi"), py::arg("truth"), py::arg("geo"), py::arg("sigma2"), py::arg("gamma"));
  m.def("mcrb_k", &mcrb_k, py::arg("A"), py::arg("B"));

  m.def(
      "sweep_csv",
      [](const std::string& config_json, std::optional<std::int64_t> trials, std::optional<std::uint64_t> seed,
         unsigned workers) {
        auto config = parse_config(config_json);
        if (trials) config.trials = *trials;
        if (seed) config.master_seed = *seed;
        config.validate();
        SweepOptions opt;
        opt.workers = workers;
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = sweep(config, opt);
        }
        std::vector<BoundsRow> rows;
        for (const auto& b : res.bounds) rows.push_back(summarize(b));
        return py::make_tuple(sweep_csv(res.rows), bounds_csv(rows));
      },
      py::arg("config_json"), py::arg("trials") = py::none(), py::arg("seed") = py::none(), py::arg("workers") = 0,
      "Runs a Monte-Carlo sweep and returns (sweep.csv, bounds.csv) as text.");

  m.def("sweep_columns", &sweep_columns);
  m.def("bounds_columns", &bounds_columns);
  m.def("standard_config_json", [](Hypothesis h, std::int64_t trials) { return config_to_json(standard_config(h, trials)); },
        py::arg("truth"), py::arg("trials") = 100000);

  m.def(
      "selfcheck",
      [](std::int64_t trials, std::uint64_t seed) {
        SelfcheckOptions opt;
        opt.trials = trials;
        opt.seed = seed;
        py::list out;
        for (const auto& r : run_selfcheck(opt)) {
          py::dict d;
          d["name"] = r.name;
          d["pass"] = r.pass;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("trials") = 20000, py::arg("seed") = 7);
}
