#pragma once

#include "dcci/corrupt.hpp"
#include "dcci/dictionary.hpp"
#include "dcci/eiv.hpp"
#include "dcci/estimand.hpp"
#include "dcci/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcci {

inline constexpr double kNormalQuantile975 = 1.96;

struct CrossFitOptions {
  Index k = 1;
  Index folds = 2;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Prepend an uncorrupted constant column to the covariates for the
  // identity, interacted and partially linear dictionaries.
  bool intercept = true;
  double pinv_rel_tol = kPinvRelTol;
};

struct FoldDiagnostics {
  Index fold = 0;
  // "outcome" for the main regression, "treatment" for a ratio denominator.
  std::string stage;
  Index train_rows = 0;
  Index test_rows = 0;
  Index regression_rank = 0;
  double regression_min_singular = 0.0;
  Index balance_rank = 0;
  double balance_min_singular = 0.0;
  double balance_residual = 0.0;
  double rowspace_residual = 0.0;
};

struct InferenceResult {
  double theta_hat = 0.0;
  double sigma_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Index n = 0;
  // Un-centered scores; mean(psi) == theta_hat.
  Vector psi;
  std::vector<FoldDiagnostics> fold_diagnostics;
  // Ratio estimands only.
  std::optional<double> theta_numerator;
  std::optional<double> theta_denominator;

  double standard_error() const;
};

// theta = mean(psi), sigma^2 = mean((psi - theta)^2), CI = theta ± 1.96 sigma / sqrt(n).
InferenceResult summarize_scores(Vector psi);

// K((V_i - v) / h) normalized to mean one over the supplied rows.
Vector kernel_weights(const Vector& v_values, double v, double h, Kernel kernel);

// Seeded shuffle split into `folds` nearly equal parts; indices sorted within each fold.
std::vector<std::vector<Index>> make_folds(Index n, Index folds, std::uint64_t seed);

/// Un-centered doubly robust score m(w, gamma) + alpha(w) (y - gamma(w)) for
/// one raw test row. z carries any uncorrupted columns first; both fits must
/// be bound to the same dictionary and training rates.
double influence_score(const Estimand& estimand, const EivFit& regression, const EivFit& balance,
                       double y, double d, const Eigen::Ref<const RowVector>& z,
                       const Eigen::Ref<const BoolRow>& observed, Index n_passthrough = 0);

/// Cross-fitted estimate: for each fold, clean the complement, fit the
/// regression and balancing weight there, and score the fold's rows.
InferenceResult cross_fit_estimate(const CorruptedDataset& data, const Estimand& estimand,
                                   DictKind dict, const CrossFitOptions& options);

// Same with a caller-supplied fold partition.
InferenceResult cross_fit_with_folds(const CorruptedDataset& data, const Estimand& estimand,
                                     DictKind dict, const CrossFitOptions& options,
                                     const std::vector<std::vector<Index>>& folds);

}  // namespace dcci
