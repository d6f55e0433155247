#pragma once

#include "dcci/corrupt.hpp"
#include "dcci/dictionary.hpp"
#include "dcci/estimand.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dcci {

/// One corruption setting of the simulation grid.
struct CorruptionCell {
  NoiseKind noise = NoiseKind::none;
  // Noise-to-signal ratio sigma_H^2 / Var(X) for gaussian and laplace noise.
  double ratio = 0.0;
  // Fraction of entries missing completely at random (rho = 1 - missing).
  double missing = 0.0;
  bool correlated_missing = false;

  // Laplace noise from a privacy calibration instead of a ratio.
  enum class Privacy { none, central, micro };
  Privacy privacy = Privacy::none;
  double epsilon = 1.0;
  double a_bar = 1.0;
  double units = 1.0;      // central: individuals per aggregate unit
  Index published = 1;     // central: published statistics p
  Index privatized = 1;    // micro: T

  std::string label() const;
  // Var(X) = r for the factor DGP.
  CorruptionSpec to_spec(Index r, Index p, std::uint64_t seed) const;
};

enum class CellMethod { dr, ols };

struct ExperimentCell {
  std::string id;
  Index n = 100;
  Index p = 100;
  Index r = 5;
  CorruptionCell corruption;
  Index k = 5;
  Estimand estimand;
  DictKind dict = DictKind::interacted;
  Index folds = 2;
  Index reps = 200;
  std::uint64_t base_seed = 0;
  double theta0 = kSimulatedTheta;
  bool intercept = true;
  CellMethod method = CellMethod::dr;
  unsigned threads = 1;
};

struct ExperimentConfig {
  Index n = 100;
  Index p = 100;
  Index r = 5;
  std::vector<CorruptionCell> corruptions;
  std::vector<Index> k_values;
  Estimand estimand;
  DictKind dict = DictKind::interacted;
  Index folds = 2;
  Index reps = 200;
  std::uint64_t base_seed = 0;
  double theta0 = kSimulatedTheta;
  bool intercept = true;
  CellMethod method = CellMethod::dr;

  // Throws ConfigurationError on reps < 1 or any k > min(n, p).
  void validate() const;
  // Cartesian product corruption x k, in that nesting order.
  std::vector<ExperimentCell> cells(unsigned threads = 1) const;

  static ExperimentConfig from_json_text(const std::string& text);
};

struct ReplicationRecord {
  Index rep = 0;
  bool ok = false;
  double theta = 0.0;
  double sigma = 0.0;
  // sigma / sqrt(n)
  double se = 0.0;
  bool covered = false;
  std::string error;
};

struct CoverageRow {
  std::string cell_id;
  std::string corruption;
  Index k = 0;
  double mean_theta = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;
  Index reps_ok = 0;
  Index reps_failed = 0;
  // More than 2% of replications failed.
  bool flagged = false;
};

/// Collects replication records. Statistics are computed in replication
/// order at finalize(), so merging shards gives bit-identical rows to a
/// single pass.
class CoverageAccumulator {
 public:
  void add(ReplicationRecord record);
  void merge(const CoverageAccumulator& other);
  CoverageRow finalize(const ExperimentCell& cell) const;
  const std::vector<ReplicationRecord>& records() const { return records_; }

 private:
  std::vector<ReplicationRecord> records_;
};

// One replication: simulate with seed base_seed ^ rep, then estimate.
ReplicationRecord run_replication(const ExperimentCell& cell, Index rep);

CoverageRow run_cell(const ExperimentCell& cell, std::vector<ReplicationRecord>* records = nullptr);

std::vector<CoverageRow> run_grid(const ExperimentConfig& config, unsigned threads = 1);

// (theta_hat - theta0) / (sigma_hat / sqrt(n)) for every successful replication.
std::vector<double> studentized_dump(const ExperimentCell& cell);
std::vector<double> studentized_values(const std::vector<ReplicationRecord>& records, double theta0);

// Kolmogorov-Smirnov distance between the empirical CDF of values and N(0, 1).
double ks_distance_normal(std::vector<double> values);

void write_coverage_csv(const std::vector<CoverageRow>& rows, std::ostream& out);
void write_studentized_csv(const std::vector<double>& values, std::ostream& out);

// Plain OLS of Y on (1, D, fill(Z)) for contrast; returns the D coefficient.
double naive_ols_effect(const CorruptedDataset& data);

}  // namespace dcci
