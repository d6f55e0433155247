#include "dcci/clean.hpp"
#include "dcci/corrupt.hpp"
#include "dcci/dr.hpp"
#include "dcci/error.hpp"
#include "dcci/harness.hpp"
#include "dcci/io.hpp"
#include "dcci/privacy.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>

namespace py = pybind11;
using namespace dcci;

namespace {

// NaN marks a missing covariate on the Python side.
MaskedMatrix masked_from_nan(const Matrix& z) {
  BoolMatrix observed(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i)
    for (Index j = 0; j < z.cols(); ++j) observed(i, j) = !std::isnan(z(i, j));
  return MaskedMatrix(z, observed);
}

py::dict dataset_dict(const CorruptedDataset& d) {
  py::dict out;
  out["z"] = d.z.values;
  out["observed"] = d.z.observed;
  if (d.y) out["y"] = *d.y;
  if (d.d) out["d"] = *d.d;
  if (d.theta_true) out["theta_true"] = *d.theta_true;
  return out;
}

py::dict result_dict(const InferenceResult& r) {
  py::dict out;
  out["theta_hat"] = r.theta_hat;
  out["sigma_hat"] = r.sigma_hat;
  out["standard_error"] = r.standard_error();
  out["ci_low"] = r.ci_low;
  out["ci_high"] = r.ci_high;
  out["n"] = r.n;
  out["psi"] = r.psi;
  if (r.theta_numerator) out["theta_numerator"] = *r.theta_numerator;
  if (r.theta_denominator) out["theta_denominator"] = *r.theta_denominator;
  py::list folds;
  for (const auto& f : r.fold_diagnostics) {
    py::dict d;
    d["fold"] = f.fold;
    d["stage"] = f.stage;
    d["train_rows"] = f.train_rows;
    d["test_rows"] = f.test_rows;
    d["regression_rank"] = f.regression_rank;
    d["balance_rank"] = f.balance_rank;
    d["balance_residual"] = f.balance_residual;
    d["rowspace_residual"] = f.rowspace_residual;
    folds.append(d);
  }
  out["fold_diagnostics"] = folds;
  return out;
}

CorruptionSpec make_spec(const std::string& noise, double sigma_h, std::optional<double> rho,
                         bool correlated, std::uint64_t seed) {
  CorruptionSpec spec;
  spec.noise = parse_noise_kind(noise);
  spec.sigma_h = sigma_h;
  if (rho) spec.rho = {*rho};
  spec.correlated_missing = correlated;
  spec.seed = seed;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Data cleaning-adjusted causal inference: cleaning, error-in-variable fits, cross-fitted DR estimates";

  // Translators run newest-first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def(
      "simulate_dgp",
      [](Index n, Index p, Index r, const std::string& noise, double ratio, double missing, bool correlated,
         std::uint64_t seed) {
        double sigma = 0.0;
        if (noise == "gaussian" || noise == "laplace") sigma = sigma_for_ratio(ratio, static_cast<double>(r));
        std::optional<double> rho;
        if (missing > 0.0) rho = 1.0 - missing;
        const CorruptionSpec spec = make_spec(noise, sigma, rho, correlated, seed);
        spec.validate(p);
        return dataset_dict(simulate_dgp(n, p, r, spec, seed));
      },
      py::arg("n"), py::arg("p"), py::arg("r"), py::arg("noise") = "none", py::arg("ratio") = 0.0,
      py::arg("missing") = 0.0, py::arg("correlated_missing") = false, py::arg("seed") = 0,
      "Factor-model DGP. Noise ratio is sigma_H^2 / r. Missing covariates are NaN in 'z'.");

  m.def(
      "generate_factor_signal",
      [](Index n, Index p, Index r, std::uint64_t seed) { return generate_factor_signal(n, p, r, seed).values; },
      py::arg("n"), py::arg("p"), py::arg("r"), py::arg("seed") = 0);

  m.def(
      "corrupt",
      [](const Matrix& x, const std::string& noise, double sigma_h, std::optional<double> rho, bool correlated,
         std::uint64_t seed) {
        const CorruptionSpec spec = make_spec(noise, sigma_h, rho, correlated, seed);
        return dataset_dict(corrupt(SignalMatrix{x, 0}, spec));
      },
      py::arg("x"), py::arg("noise") = "none", py::arg("sigma_h") = 0.0, py::arg("rho") = py::none(),
      py::arg("correlated_missing") = false, py::arg("seed") = 0);

  m.def(
      "estimate_rates", [](const Matrix& z) { return estimate_rates(masked_from_nan(z)); }, py::arg("z"));
  m.def(
      "fill", [](const Matrix& z, const Vector& rho_hat) { return fill(masked_from_nan(z), rho_hat); },
      py::arg("z"), py::arg("rho_hat"));
  m.def(
      "pca_truncate", [](const Matrix& x, Index k) { return pca_truncate(x, k).cleaned.values; }, py::arg("x"),
      py::arg("k"));
  m.def(
      "fit_cleaning",
      [](const Matrix& z, Index k) {
        const CleaningResult r = fit_cleaning(masked_from_nan(z), k);
        py::dict out;
        out["cleaned"] = r.cleaned.values;
        out["rho_hat"] = r.model.rho_hat;
        out["singular_values"] = r.model.singular_values;
        return out;
      },
      py::arg("z"), py::arg("k"));
  m.def(
      "scree", [](const Matrix& z) { return scree(masked_from_nan(z)); }, py::arg("z"));
  m.def("suggest_k", &suggest_k, py::arg("singular_values"), py::arg("fraction") = 0.2);

  m.def(
      "cross_fit_estimate",
      [](const Vector& y, const Vector& d, const Matrix& z, const std::string& estimand, std::optional<std::string> dict,
         Index k, Index folds, std::uint64_t seed, unsigned threads, bool intercept, std::optional<Vector> instrument,
         std::optional<Vector> weights, std::optional<Vector> v, std::optional<Vector> t1, std::optional<Vector> t2,
         double v0, double bandwidth, const std::string& kernel) {
        CorruptedDataset data;
        data.y = y;
        data.d = d;
        data.z = masked_from_nan(z);
        data.instrument = instrument;
        data.weights = weights;
        data.v = v;
        Estimand e;
        e.kind = parse_estimand_kind(estimand);
        e.use_weights = weights.has_value();
        e.v = v0;
        e.h = bandwidth;
        e.kernel = parse_kernel(kernel);
        if (t1) e.t1 = *t1;
        if (t2) e.t2 = *t2;
        const DictKind kind = dict ? parse_dict_kind(*dict) : e.required_dictionary();
        CrossFitOptions o;
        o.k = k;
        o.folds = folds;
        o.seed = seed;
        o.threads = threads;
        o.intercept = intercept;
        InferenceResult r;
        {
          py::gil_scoped_release release;
          r = cross_fit_estimate(data, e, kind, o);
        }
        return result_dict(r);
      },
      py::arg("y"), py::arg("d"), py::arg("z"), py::arg("estimand") = "ate", py::arg("dict") = py::none(),
      py::arg("k") = 5, py::arg("folds") = 2, py::arg("seed") = 0, py::arg("threads") = 1,
      py::arg("intercept") = true, py::arg("instrument") = py::none(), py::arg("weights") = py::none(),
      py::arg("v") = py::none(), py::arg("t1") = py::none(), py::arg("t2") = py::none(), py::arg("v0") = 0.0,
      py::arg("bandwidth") = 1.0, py::arg("kernel") = "gaussian",
      "Cross-fitted doubly robust estimate with data cleaning. NaN entries of z are missing.");

  m.def(
      "central_scale",
      [](double epsilon, Index p, const Vector& a_bar, const Vector& units) {
        return central_scale(CentralDpSpec{epsilon, p, a_bar, units});
      },
      py::arg("epsilon"), py::arg("p"), py::arg("a_bar"), py::arg("units"));
  m.def(
      "micro_scale", [](double epsilon, Index t, double a_bar) { return micro_scale(MicroDpSpec{epsilon, t, a_bar}); },
      py::arg("epsilon"), py::arg("t"), py::arg("a_bar") = 1.0);
  m.def(
      "privatize_micro",
      [](const Matrix& x, double epsilon, Index t, double a_bar, std::uint64_t seed) {
        return privatize(x, MicroDpSpec{epsilon, t, a_bar}, seed).z.values;
      },
      py::arg("x"), py::arg("epsilon"), py::arg("t"), py::arg("a_bar") = 1.0, py::arg("seed") = 0);

  m.def(
      "run_coverage",
      [](const std::string& config_json, unsigned threads) {
        const ExperimentConfig config = ExperimentConfig::from_json_text(config_json);
        std::vector<CoverageRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_grid(config, threads);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["cell_id"] = r.cell_id;
          d["corruption"] = r.corruption;
          d["k"] = r.k;
          d["mean_theta"] = r.mean_theta;
          d["mean_se"] = r.mean_se;
          d["coverage"] = r.coverage;
          d["reps_failed"] = r.reps_failed;
          out.append(d);
        }
        return out;
      },
      py::arg("config_json"), py::arg("threads") = 1, "Run a coverage grid from an experiment JSON document.");
}
