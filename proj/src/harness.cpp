#include "dcci/harness.hpp"

#include "dcci/clean.hpp"
#include "dcci/dr.hpp"
#include "dcci/eiv.hpp"
#include "dcci/error.hpp"
#include "dcci/numeric.hpp"
#include "dcci/privacy.hpp"
#include "dcci/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace dcci {

namespace {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string short_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace

std::string CorruptionCell::label() const {
  std::string out;
  switch (privacy) {
    case Privacy::central:
      out = "central_dp(eps=" + short_number(epsilon) + ")";
      break;
    case Privacy::micro:
      out = "micro_dp(eps=" + short_number(epsilon) + ",T=" + std::to_string(privatized) + ")";
      break;
    case Privacy::none:
      out = to_string(noise);
      if (noise == NoiseKind::gaussian || noise == NoiseKind::laplace) {
        out += "(" + short_number(ratio) + ")";
      }
      break;
  }
  if (missing > 0.0) {
    out += "+missing(" + short_number(missing) + (correlated_missing ? ",row-correlated" : "") + ")";
  }
  return out;
}

CorruptionSpec CorruptionCell::to_spec(Index r, Index p, std::uint64_t seed) const {
  CorruptionSpec spec;
  spec.seed = seed;
  spec.correlated_missing = correlated_missing;
  if (!(missing >= 0.0 && missing < 1.0)) throw ConfigurationError("missing fraction must lie in [0, 1)");
  if (missing > 0.0) spec.rho = {1.0 - missing};
  switch (privacy) {
    case Privacy::none:
      spec.noise = noise;
      if (noise == NoiseKind::gaussian || noise == NoiseKind::laplace) {
        spec.sigma_h = sigma_for_ratio(ratio, static_cast<double>(r));
      }
      break;
    case Privacy::central: {
      CentralDpSpec dp;
      dp.epsilon = epsilon;
      dp.p = published;
      dp.a_bar = Vector::Constant(1, a_bar);
      dp.units = Vector::Constant(1, units);
      spec.noise = NoiseKind::laplace;
      spec.sigma_h = laplace_sigma_from_scale(central_scale(dp)(0));
      break;
    }
    case Privacy::micro: {
      MicroDpSpec dp{epsilon, privatized, a_bar};
      if (privatized > p) throw ConfigurationError("micro privacy T exceeds p");
      spec.noise = NoiseKind::laplace;
      spec.sigma_h = laplace_sigma_from_scale(micro_scale(dp));
      spec.noisy_columns = privatized;
      break;
    }
  }
  spec.validate(p);
  return spec;
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw ConfigurationError("reps must be at least 1");
  if (n < 2 || p < 2 || r < 1 || r > std::min(n, p)) {
    throw ConfigurationError("need n, p >= 2 and 1 <= r <= min(n, p)");
  }
  for (Index k : k_values) {
    if (k < 1 || k > std::min(n, p)) {
      throw ConfigurationError("every k must lie in [1, min(n, p)]; got " + std::to_string(k));
    }
  }
  if (estimand.kind != Estimand::Kind::ate && estimand.kind != Estimand::Kind::partially_linear) {
    throw ConfigurationError("the simulation harness supports the ate and plinear estimands");
  }
  check_compatible(estimand, Dictionary(dict, p));
}

std::vector<ExperimentCell> ExperimentConfig::cells(unsigned threads) const {
  validate();
  std::vector<ExperimentCell> out;
  for (const auto& corruption : corruptions) {
    for (Index k : k_values) {
      ExperimentCell cell;
      char id[32];
      std::snprintf(id, sizeof(id), "cell-%03zu", out.size());
      cell.id = id;
      cell.n = n;
      cell.p = p;
      cell.r = r;
      cell.corruption = corruption;
      cell.k = k;
      cell.estimand = estimand;
      cell.dict = dict;
      cell.folds = folds;
      cell.reps = reps;
      cell.base_seed = base_seed;
      cell.theta0 = theta0;
      cell.intercept = intercept;
      cell.method = method;
      cell.threads = threads;
      out.push_back(std::move(cell));
    }
  }
  return out;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("experiment config is not valid JSON: ") + e.what());
  }
  static const std::vector<std::string> known = {
      "schema_version", "n",     "p",     "r",         "k",         "corruptions", "estimand",
      "dict",           "folds", "reps",  "base_seed", "theta0",    "intercept",   "method"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigurationError("unknown experiment config key '" + key + "'");
    }
  }
  try {
    ExperimentConfig c;
    c.n = j.value("n", c.n);
    c.p = j.value("p", c.p);
    c.r = j.value("r", c.r);
    if (j.contains("k")) {
      if (j["k"].is_array()) {
        c.k_values = j["k"].get<std::vector<Index>>();
      } else {
        c.k_values = {j["k"].get<Index>()};
      }
    } else {
      c.k_values = {c.r};
    }
    c.estimand.kind = parse_estimand_kind(j.value("estimand", std::string("ate")));
    c.dict = parse_dict_kind(j.value("dict", std::string("interacted")));
    c.folds = j.value("folds", c.folds);
    c.reps = j.value("reps", c.reps);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.theta0 = j.value("theta0", c.theta0);
    c.intercept = j.value("intercept", c.intercept);
    const std::string method = j.value("method", std::string("dr"));
    if (method == "dr") {
      c.method = CellMethod::dr;
    } else if (method == "ols") {
      c.method = CellMethod::ols;
    } else {
      throw ConfigurationError("method must be 'dr' or 'ols'");
    }
    for (const auto& item : j.value("corruptions", nlohmann::json::array())) {
      CorruptionCell cell;
      cell.noise = parse_noise_kind(item.value("noise", std::string("none")));
      cell.ratio = item.value("ratio", 0.0);
      cell.missing = item.value("missing", 0.0);
      cell.correlated_missing = item.value("correlated_missing", false);
      const std::string privacy = item.value("privacy", std::string("none"));
      if (privacy == "central") {
        cell.privacy = CorruptionCell::Privacy::central;
      } else if (privacy == "micro") {
        cell.privacy = CorruptionCell::Privacy::micro;
      } else if (privacy != "none") {
        throw ConfigurationError("privacy must be 'none', 'central' or 'micro'");
      }
      cell.epsilon = item.value("epsilon", cell.epsilon);
      cell.a_bar = item.value("a_bar", cell.a_bar);
      cell.units = item.value("units", cell.units);
      cell.published = item.value("published", c.p);
      cell.privatized = item.value("T", cell.privatized);
      c.corruptions.push_back(cell);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed experiment config: ") + e.what());
  }
}

void CoverageAccumulator::add(ReplicationRecord record) { records_.push_back(std::move(record)); }

void CoverageAccumulator::merge(const CoverageAccumulator& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

CoverageRow CoverageAccumulator::finalize(const ExperimentCell& cell) const {
  std::vector<ReplicationRecord> sorted = records_;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.rep < b.rep; });
  CoverageRow row;
  row.cell_id = cell.id;
  row.corruption = cell.corruption.label();
  row.k = cell.k;
  std::vector<double> thetas, ses;
  Index covered = 0;
  for (const auto& rec : sorted) {
    if (!rec.ok) {
      ++row.reps_failed;
      continue;
    }
    ++row.reps_ok;
    thetas.push_back(rec.theta);
    ses.push_back(rec.se);
    if (rec.covered) ++covered;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.mean_theta = thetas.empty() ? nan : pairwise_mean(thetas);
  if (cell.method == CellMethod::ols) {
    row.mean_se = nan;
    row.coverage = nan;
  } else {
    row.mean_se = ses.empty() ? nan : pairwise_mean(ses);
    row.coverage = row.reps_ok > 0 ? static_cast<double>(covered) / static_cast<double>(row.reps_ok) : nan;
  }
  const auto total = static_cast<double>(row.reps_ok + row.reps_failed);
  row.flagged = total > 0 && static_cast<double>(row.reps_failed) > 0.02 * total;
  return row;
}

double naive_ols_effect(const CorruptedDataset& data) {
  if (!data.y || !data.d) throw ConfigurationError("OLS contrast needs Y and D");
  const Index n = data.rows();
  Matrix design(n, 2 + data.cols());
  design.col(0).setOnes();
  design.col(1) = *data.d;
  design.rightCols(data.cols()) = fill(data.z, estimate_rates(data.z));
  return fit_regression(design, *data.y).coef(1);
}

ReplicationRecord run_replication(const ExperimentCell& cell, Index rep) {
  ReplicationRecord rec;
  rec.rep = rep;
  const std::uint64_t seed = derive_seed(cell.base_seed, static_cast<std::uint64_t>(rep));
  try {
    const CorruptionSpec spec = cell.corruption.to_spec(cell.r, cell.p, seed);
    const CorruptedDataset data = simulate_dgp(cell.n, cell.p, cell.r, spec, seed);
    if (cell.method == CellMethod::ols) {
      rec.theta = naive_ols_effect(data);
      rec.sigma = rec.se = std::numeric_limits<double>::quiet_NaN();
      rec.ok = std::isfinite(rec.theta);
      return rec;
    }
    CrossFitOptions options;
    options.k = cell.k;
    options.folds = cell.folds;
    options.seed = seed;
    options.intercept = cell.intercept;
    const InferenceResult result = cross_fit_estimate(data, cell.estimand, cell.dict, options);
    rec.theta = result.theta_hat;
    rec.sigma = result.sigma_hat;
    rec.se = result.standard_error();
    rec.covered = result.ci_low <= cell.theta0 && cell.theta0 <= result.ci_high;
    rec.ok = std::isfinite(rec.theta) && std::isfinite(rec.sigma);
    if (!rec.ok) rec.error = "non-finite estimate";
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

namespace {

std::vector<ReplicationRecord> run_all(const ExperimentCell& cell) {
  if (cell.reps < 1) throw ConfigurationError("reps must be at least 1");
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(cell.reps));
  parallel_for(records.size(), std::max(1u, cell.threads), [&](std::size_t t) {
    records[t] = run_replication(cell, static_cast<Index>(t) + 1);
  });
  return records;
}

}  // namespace

CoverageRow run_cell(const ExperimentCell& cell, std::vector<ReplicationRecord>* records) {
  std::vector<ReplicationRecord> recs = run_all(cell);
  CoverageAccumulator acc;
  for (const auto& r : recs) acc.add(r);
  if (records) *records = std::move(recs);
  return acc.finalize(cell);
}

std::vector<CoverageRow> run_grid(const ExperimentConfig& config, unsigned threads) {
  std::vector<CoverageRow> rows;
  for (const auto& cell : config.cells(threads)) rows.push_back(run_cell(cell));
  return rows;
}

std::vector<double> studentized_values(const std::vector<ReplicationRecord>& records, double theta0) {
  std::vector<double> out;
  for (const auto& rec : records) {
    if (rec.ok && rec.se > 0.0) out.push_back((rec.theta - theta0) / rec.se);
  }
  return out;
}

std::vector<double> studentized_dump(const ExperimentCell& cell) {
  return studentized_values(run_all(cell), cell.theta0);
}

double ks_distance_normal(std::vector<double> values) {
  if (values.empty()) return 1.0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf(values[i]);
    worst = std::max({worst, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return worst;
}

void write_coverage_csv(const std::vector<CoverageRow>& rows, std::ostream& out) {
  out << "cell_id,corruption,k,mean_theta,mean_se,coverage,reps_failed\n";
  for (const auto& row : rows) {
    out << row.cell_id << ",\"" << row.corruption << "\"," << row.k << ','
        << format_number(row.mean_theta) << ',' << format_number(row.mean_se) << ','
        << format_number(row.coverage) << ',' << row.reps_failed << '\n';
  }
}

void write_studentized_csv(const std::vector<double>& values, std::ostream& out) {
  out << "index,studentized\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_number(values[i]) << '\n';
}

}  // namespace dcci
