#include "dcci/cli.hpp"

#include "dcci/clean.hpp"
#include "dcci/corrupt.hpp"
#include "dcci/dr.hpp"
#include "dcci/error.hpp"
#include "dcci/harness.hpp"
#include "dcci/io.hpp"
#include "dcci/privacy.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace dcci {

namespace {

// Usage problems found after parsing (bad combinations, bad values).
struct UsageError : Error {
  using Error::Error;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

Vector broadcast(const std::vector<double>& values, Index size, const char* flag) {
  if (values.size() == 1) return Vector::Constant(size, values.front());
  if (static_cast<Index>(values.size()) != size) {
    throw UsageError(std::string(flag) + ": expected 1 or " + std::to_string(size) + " values");
  }
  return Eigen::Map<const Vector>(values.data(), size);
}

// Writes text to the --out path, or to `out` when no path is given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  file << text;
}

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out_path;
};

struct SimulateArgs {
  Index n = 0, p = 0, r = 0;
  std::string noise = "none";
  double ratio = 0.0;
  double missing = 0.0;
  bool correlated = false;
  std::string sidecar;
};

void run_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out) {
  CorruptionSpec spec;
  spec.noise = parse_noise_kind(a.noise);
  if (spec.noise == NoiseKind::gaussian || spec.noise == NoiseKind::laplace) {
    spec.sigma_h = sigma_for_ratio(a.ratio, static_cast<double>(a.r));
  }
  if (a.missing > 0.0) spec.rho = {1.0 - a.missing};
  spec.correlated_missing = a.correlated;
  spec.seed = g.seed;
  spec.validate(a.p);
  const CorruptedDataset data = simulate_dgp(a.n, a.p, a.r, spec, g.seed);

  std::ostringstream csv;
  write_csv(data, csv);
  emit(g.out_path, csv.str(), out);

  std::string sidecar = a.sidecar;
  if (sidecar.empty() && !g.out_path.empty()) sidecar = g.out_path + ".json";
  if (!sidecar.empty()) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["theta_true"] = *data.theta_true;
    j["n"] = a.n;
    j["p"] = a.p;
    j["r"] = a.r;
    j["seed"] = g.seed;
    j["noise_to_signal_ratio"] = a.ratio;
    j["missing"] = a.missing;
    j["spec"] = to_json(spec);
    emit(sidecar, j.dump(2) + "\n", out);
  }
}

struct ScreeArgs {
  std::string input;
};

void run_scree(const ScreeArgs& a, const Globals& g, std::ostream& out) {
  const CorruptedDataset data = read_csv_file(a.input, true);
  std::ostringstream csv;
  write_spectrum_csv(scree(data.z), csv);
  emit(g.out_path, csv.str(), out);
}

struct EstimateArgs {
  std::string input;
  std::string estimand = "ate";
  std::string dict;
  Index k = 0;
  Index folds = 2;
  bool no_intercept = false;
  bool weighted = false;
  std::string t1 = "1";
  std::string t2 = "0";
  double v = 0.0;
  double h = 1.0;
  std::string kernel = "gaussian";
};

Estimand build_estimand(const EstimateArgs& a) {
  Estimand e;
  e.kind = parse_estimand_kind(a.estimand);
  e.use_weights = a.weighted;
  e.v = a.v;
  e.h = a.h;
  e.kernel = parse_kernel(a.kernel);
  if (a.weighted && e.kind != Estimand::Kind::partially_linear && e.kind != Estimand::Kind::pliv) {
    throw UsageError("--weighted applies to the plinear and pliv estimands only");
  }
  if (e.kind == Estimand::Kind::localized_ate && !(a.h > 0.0)) {
    throw UsageError("--bandwidth must be positive");
  }
  return e;
}

void run_estimate(const EstimateArgs& a, const Globals& g, std::ostream& out) {
  Estimand estimand;
  DictKind dict;
  try {
    estimand = build_estimand(a);
    dict = a.dict.empty() ? estimand.required_dictionary() : parse_dict_kind(a.dict);
    if (dict != estimand.required_dictionary()) {
      throw UsageError("estimand '" + a.estimand + "' is incompatible with --dict " + a.dict +
                       " (requires " + to_string(estimand.required_dictionary()) + ")");
    }
    if (a.k < 1) throw UsageError("--k must be at least 1");
    if (a.folds < 2) throw UsageError("--folds must be at least 2");
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }

  const CorruptedDataset data = read_csv_file(a.input);
  if (estimand.kind == Estimand::Kind::policy_affine) {
    try {
      estimand.t1 = broadcast(parse_list(a.t1, "--t1"), data.cols(), "--t1");
      estimand.t2 = broadcast(parse_list(a.t2, "--t2"), data.cols(), "--t2");
    } catch (const UsageError&) {
      throw;
    }
  }

  CrossFitOptions options;
  options.k = a.k;
  options.folds = a.folds;
  options.seed = g.seed;
  options.threads = g.threads;
  options.intercept = !a.no_intercept;
  const InferenceResult result = cross_fit_estimate(data, estimand, dict, options);

  nlohmann::json j = to_json(result);
  j["config"] = {{"input", a.input},
                 {"estimand", estimand.name()},
                 {"dict", to_string(dict)},
                 {"k", a.k},
                 {"folds", a.folds},
                 {"seed", g.seed},
                 {"intercept", options.intercept}};
  if (estimand.kind == Estimand::Kind::localized_ate) {
    j["config"]["v"] = a.v;
    j["config"]["h"] = a.h;
    j["config"]["kernel"] = a.kernel;
  }
  if (estimand.kind == Estimand::Kind::policy_affine) {
    j["config"]["t1"] = std::vector<double>(estimand.t1.data(), estimand.t1.data() + estimand.t1.size());
    j["config"]["t2"] = std::vector<double>(estimand.t2.data(), estimand.t2.data() + estimand.t2.size());
  }
  if (estimand.use_weights) j["config"]["weighted"] = true;
  emit(g.out_path, j.dump(2) + "\n", out);
}

struct CoverageArgs {
  std::string config;
  std::string studentized;
};

void run_coverage(const CoverageArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw Error("cannot open '" + a.config + "'");
  std::stringstream text;
  text << in.rdbuf();
  ExperimentConfig config;
  try {
    config = ExperimentConfig::from_json_text(text.str());
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }

  std::vector<CoverageRow> rows;
  std::ostringstream student;
  student << "cell_id,index,studentized\n";
  for (const auto& cell : config.cells(g.threads)) {
    std::vector<ReplicationRecord> records;
    rows.push_back(run_cell(cell, &records));
    if (rows.back().flagged) {
      err << "warning: " << cell.id << " had " << rows.back().reps_failed << " failed replications\n";
    }
    const auto values = studentized_values(records, cell.theta0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      student << cell.id << ',' << i << ',' << format_double(values[i]) << '\n';
    }
  }
  std::ostringstream csv;
  write_coverage_csv(rows, csv);
  emit(g.out_path, csv.str(), out);
  if (!a.studentized.empty()) emit(a.studentized, student.str(), out);
}

struct PrivacyArgs {
  std::string regime;
  double epsilon = 0.0;
  Index p = 0;
  std::string a_bar = "1";
  std::string units = "1";
  Index n = 0;
  Index t = 0;
};

void run_privacy(const PrivacyArgs& a, const Globals& g, std::ostream& out) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["regime"] = a.regime;
  j["epsilon"] = a.epsilon;
  try {
    if (a.regime == "central") {
      const std::vector<double> units = parse_list(a.units, "--L");
      const std::vector<double> a_bar = parse_list(a.a_bar, "--a-bar");
      const Index count = static_cast<Index>(std::max(units.size(), a_bar.size()));
      CentralDpSpec spec;
      spec.epsilon = a.epsilon;
      spec.p = a.p;
      spec.units = broadcast(units, count, "--L");
      spec.a_bar = broadcast(a_bar, count, "--a-bar");
      const Vector scale = central_scale(spec);
      const SubExponentialBound bound = central_subexp_bound(spec);
      const Index n = a.n > 0 ? a.n : count;
      const PoverLReport report = p_over_l_diagnostic(spec, n, a.p);
      j["p"] = a.p;
      j["scale"] = std::vector<double>(scale.data(), scale.data() + scale.size());
      j["scale_max"] = scale.maxCoeff();
      std::vector<double> variance(static_cast<std::size_t>(scale.size()));
      for (Index i = 0; i < scale.size(); ++i) variance[static_cast<std::size_t>(i)] = laplace_variance(scale(i));
      j["variance"] = variance;
      j["k_a_bound"] = bound.k_a;
      j["kappa_bound"] = bound.kappa;
      j["p_over_l"] = {{"max_p_over_l", report.max_p_over_l},
                       {"log_np", report.log_np},
                       {"n", n},
                       {"passes", report.passes}};
      if (!report.passes) j["warning"] = "published variables per aggregate unit exceed ln(n p)";
    } else if (a.regime == "micro") {
      MicroDpSpec spec;
      spec.epsilon = a.epsilon;
      spec.t = a.t;
      const std::vector<double> a_bar = parse_list(a.a_bar, "--a-bar");
      if (a_bar.size() != 1) throw UsageError("--a-bar takes a single value for the micro regime");
      spec.a_bar = a_bar.front();
      const double scale = micro_scale(spec);
      const SubExponentialBound bound = micro_subexp_bound(spec);
      j["T"] = a.t;
      j["scale"] = scale;
      j["variance"] = laplace_variance(scale);
      j["k_a_bound"] = bound.k_a;
      j["kappa_bound"] = bound.kappa;
    } else {
      throw UsageError("--regime must be central or micro");
    }
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }
  emit(g.out_path, j.dump(2) + "\n", out);
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal inference with corrupted covariates: cleaning, error-in-variable fits, "
               "cross-fitted doubly robust intervals"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out_path, "Output path (default: standard output)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate the factor-model DGP and write CSV");
  simulate->add_option("--n", sim.n, "Rows")->required();
  simulate->add_option("--p", sim.p, "Covariates")->required();
  simulate->add_option("--r", sim.r, "Signal rank")->required();
  simulate->add_option("--noise", sim.noise, "none|gaussian|laplace|discretize")
      ->check(CLI::IsMember({"none", "gaussian", "laplace", "discretize"}));
  simulate->add_option("--ratio", sim.ratio, "Noise-to-signal ratio (noise variance / r)");
  simulate->add_option("--missing", sim.missing, "Fraction of covariate entries missing");
  simulate->add_flag("--correlated-missing", sim.correlated, "Row-correlated missingness");
  simulate->add_option("--sidecar", sim.sidecar, "JSON sidecar path (default: <out>.json)");

  ScreeArgs scr;
  auto* scree_cmd = app.add_subcommand("scree", "Singular value spectrum of a CSV's covariates");
  scree_cmd->add_option("--input", scr.input, "CSV input")->required();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Cross-fitted doubly robust estimate");
  estimate->add_option("--input", est.input, "CSV input")->required();
  estimate->add_option("--estimand", est.estimand, "ate|late|policy|derivative|plinear|pliv|cate")
      ->check(CLI::IsMember({"ate", "late", "policy", "derivative", "plinear", "pliv", "cate"}));
  estimate->add_option("--dict", est.dict, "identity|interacted|plinear|quad")
      ->check(CLI::IsMember({"identity", "interacted", "plinear", "quad"}));
  estimate->add_option("--k", est.k, "Retained principal components")->required();
  estimate->add_option("--folds", est.folds, "Cross-fitting folds");
  estimate->add_flag("--no-intercept", est.no_intercept, "Do not prepend a constant column");
  estimate->add_flag("--weighted", est.weighted, "Use the W column as unit weights");
  estimate->add_option("--t1", est.t1, "Policy scale (one value or comma list)");
  estimate->add_option("--t2", est.t2, "Policy shift (one value or comma list)");
  estimate->add_option("--v", est.v, "Localization point");
  estimate->add_option("--bandwidth", est.h, "Localization bandwidth");
  estimate->add_option("--kernel", est.kernel, "gaussian|epanechnikov")
      ->check(CLI::IsMember({"gaussian", "epanechnikov"}));

  CoverageArgs cov;
  auto* coverage = app.add_subcommand("coverage", "Monte Carlo coverage grid");
  coverage->add_option("--config", cov.config, "Experiment JSON")->required();
  coverage->add_option("--studentized", cov.studentized, "Also write studentized estimates CSV");

  PrivacyArgs priv;
  auto* privacy = app.add_subcommand("privacy-calibrate", "Laplace mechanism calibration");
  privacy->add_option("--regime", priv.regime, "central|micro")
      ->required()
      ->check(CLI::IsMember({"central", "micro"}));
  privacy->add_option("--epsilon", priv.epsilon, "Privacy loss")->required();
  privacy->add_option("--p", priv.p, "Published variables (central)");
  privacy->add_option("--a-bar", priv.a_bar, "Entry bound(s)");
  privacy->add_option("--L", priv.units, "Individuals per aggregate unit (one value or list)");
  privacy->add_option("--n", priv.n, "Units for the p/L diagnostic (default: number of L values)");
  privacy->add_option("--T", priv.t, "Privatized variables (micro)");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) run_simulate(sim, g, out);
    else if (scree_cmd->parsed()) run_scree(scr, g, out);
    else if (estimate->parsed()) run_estimate(est, g, out);
    else if (coverage->parsed()) run_coverage(cov, g, out, err);
    else if (privacy->parsed()) run_privacy(priv, g, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace dcci
