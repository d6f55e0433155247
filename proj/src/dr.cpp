#include "dcci/dr.hpp"

#include "dcci/clean.hpp"
#include "dcci/error.hpp"
#include "dcci/numeric.hpp"
#include "dcci/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dcci {

namespace {

constexpr std::uint64_t kFoldStream = 0x30;

bool uses_intercept(DictKind kind) {
  return kind == DictKind::identity || kind == DictKind::interacted ||
         kind == DictKind::partially_linear;
}

// Uncorrupted columns prepended to the covariates: an optional constant and,
// for the localized estimand, the localization covariate V.
Matrix passthrough_columns(const CorruptedDataset& data, const Estimand& estimand, DictKind dict,
                           const CrossFitOptions& options) {
  const Index n = data.rows();
  std::vector<Vector> cols;
  if (options.intercept && uses_intercept(dict)) cols.push_back(Vector::Ones(n));
  if (estimand.kind == Estimand::Kind::localized_ate) cols.push_back(*data.v);
  Matrix out(n, static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = cols[c];
  return out;
}

void require_binary(const Vector& v, const char* name) {
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0 && v(i) != 1.0) {
      throw ConfigurationError(std::string(name) + " must be binary (0/1) for this estimand");
    }
  }
}

void validate_inputs(const CorruptedDataset& data, const Estimand& estimand) {
  data.validate();
  if (!data.y) throw ConfigurationError("estimation requires an outcome column Y");
  if (!data.d) throw ConfigurationError("estimation requires a treatment column D");
  if (estimand.is_ratio() && !data.instrument) {
    throw ConfigurationError("estimand '" + estimand.name() + "' requires an instrument column U");
  }
  if (estimand.kind == Estimand::Kind::localized_ate && !data.v) {
    throw ConfigurationError("localized ATE requires a localization column V");
  }
  if (estimand.use_weights && !data.weights) {
    throw ConfigurationError("weighted estimand requires a weights column W");
  }
  switch (estimand.kind) {
    case Estimand::Kind::ate:
    case Estimand::Kind::localized_ate: require_binary(*data.d, "D"); break;
    case Estimand::Kind::late: require_binary(*data.instrument, "U"); break;
    default: break;
  }
  estimand.validate(data.cols());
}

}  // namespace

double InferenceResult::standard_error() const {
  return n > 0 ? sigma_hat / std::sqrt(static_cast<double>(n)) : 0.0;
}

InferenceResult summarize_scores(Vector psi) {
  InferenceResult out;
  out.n = psi.size();
  if (out.n == 0) throw DimensionError("summarize_scores: no scores");
  const std::span<const double> view(psi.data(), static_cast<std::size_t>(psi.size()));
  out.theta_hat = pairwise_mean(view);
  out.sigma_hat = std::sqrt(population_variance(view));
  const double half = kNormalQuantile975 * out.sigma_hat / std::sqrt(static_cast<double>(out.n));
  out.ci_low = out.theta_hat - half;
  out.ci_high = out.theta_hat + half;
  out.psi = std::move(psi);
  return out;
}

Vector kernel_weights(const Vector& v_values, double v, double h, Kernel kernel) {
  if (!(h > 0.0)) throw ConfigurationError("kernel_weights: bandwidth must be positive");
  Vector w(v_values.size());
  for (Index i = 0; i < v_values.size(); ++i) w(i) = kernel_value(kernel, (v_values(i) - v) / h);
  const double mean = pairwise_mean(w);
  if (!(mean > 0.0)) {
    throw EmptyWindowError("kernel_weights: every kernel value is zero at v=" + std::to_string(v) +
                           ", h=" + std::to_string(h));
  }
  return w / mean;
}

std::vector<std::vector<Index>> make_folds(Index n, Index folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigurationError("cross-fitting needs at least 2 folds");
  if (n < 2 * folds) {
    throw ConfigurationError("need n >= 2 * folds rows (n=" + std::to_string(n) +
                             ", folds=" + std::to_string(folds) + ")");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed, kFoldStream);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  for (Index f = 0; f < folds; ++f) {
    const Index begin = f * n / folds;
    const Index end = (f + 1) * n / folds;
    auto& fold = out[static_cast<std::size_t>(f)];
    fold.assign(perm.begin() + begin, perm.begin() + end);
    std::sort(fold.begin(), fold.end());
  }
  return out;
}

double influence_score(const Estimand& estimand, const EivFit& regression, const EivFit& balance,
                       double y, double d, const Eigen::Ref<const RowVector>& z,
                       const Eigen::Ref<const BoolRow>& observed, Index n_passthrough) {
  if (!regression.dict) throw ConfigurationError("influence_score: regression fit is not bound");
  const Vector filled = fill_row(z, observed, regression.rho_hat);
  const double plug_in =
      moment_row(estimand, *regression.dict, d, filled, n_passthrough).dot(regression.coef);
  const double gamma = predict(regression, d, z, observed);
  const double alpha = predict(balance, d, z, observed);
  return plug_in + alpha * (y - gamma);
}

InferenceResult cross_fit_estimate(const CorruptedDataset& data, const Estimand& estimand,
                                   DictKind dict, const CrossFitOptions& options) {
  validate_inputs(data, estimand);
  return cross_fit_with_folds(data, estimand, dict, options,
                              make_folds(data.rows(), options.folds, options.seed));
}

InferenceResult cross_fit_with_folds(const CorruptedDataset& data, const Estimand& estimand,
                                     DictKind dict_kind, const CrossFitOptions& options,
                                     const std::vector<std::vector<Index>>& folds) {
  validate_inputs(data, estimand);
  const Index n = data.rows();
  const Index p = data.cols();
  const Matrix fixed = passthrough_columns(data, estimand, dict_kind, options);
  const Index n_pass = fixed.cols();
  const Dictionary dict(dict_kind, n_pass + p);
  check_compatible(estimand, dict);

  // Treatment slot of the dictionary: the instrument for ratio estimands.
  const Vector& treat = estimand.is_ratio() ? *data.instrument : *data.d;
  const bool ratio = estimand.is_ratio();

  Vector unit_weight = Vector::Ones(n);
  if (estimand.use_weights) unit_weight = *data.weights / pairwise_mean(*data.weights);

  {
    Index total = 0;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& fold : folds) {
      for (Index i : fold) {
        if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)]) {
          throw ConfigurationError("fold partition must cover each row exactly once");
        }
        seen[static_cast<std::size_t>(i)] = true;
        ++total;
      }
    }
    if (total != n) throw ConfigurationError("fold partition must cover each row exactly once");
  }

  Vector psi_num(n);
  Vector psi_den = Vector::Zero(n);
  std::vector<std::vector<FoldDiagnostics>> diagnostics(folds.size());

  auto run_fold = [&](std::size_t f) {
    const auto& test = folds[f];
    std::vector<Index> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    const auto m = static_cast<Index>(train.size());
    if (test.empty() || m == 0) throw ConfigurationError("empty fold");

    const CleaningResult cleaning = fit_cleaning(data.z.select_rows(train), options.k);

    Matrix x_train(m, n_pass + p);
    Vector treat_train(m), y_train(m), d_train(m);
    for (Index r = 0; r < m; ++r) {
      const Index i = train[static_cast<std::size_t>(r)];
      x_train.row(r) << fixed.row(i), cleaning.cleaned.values.row(r);
      treat_train(r) = treat(i);
      y_train(r) = (*data.y)(i);
      d_train(r) = (*data.d)(i);
    }
    Vector rho_full(n_pass + p);
    rho_full << Vector::Ones(n_pass), cleaning.model.rho_hat;

    const Matrix b = dict.apply_matrix(treat_train, x_train);
    const CounterfactualMoment moment =
        counterfactual_moment(estimand, treat_train, x_train, dict, n_pass);

    EivFit reg_outcome = fit_regression(b, y_train, options.pinv_rel_tol);
    EivFit balance = fit_balance(reg_outcome.gram, moment, options.pinv_rel_tol);
    bind(reg_outcome, dict, rho_full);
    bind(balance, dict, rho_full);
    std::optional<EivFit> reg_treatment;
    if (ratio) {
      reg_treatment = fit_regression(b, d_train, options.pinv_rel_tol);
      bind(*reg_treatment, dict, rho_full);
    }

    FoldDiagnostics diag;
    diag.fold = static_cast<Index>(f);
    diag.stage = "outcome";
    diag.train_rows = m;
    diag.test_rows = static_cast<Index>(test.size());
    diag.regression_rank = reg_outcome.rank_used;
    diag.regression_min_singular = reg_outcome.min_nonzero_singular;
    diag.balance_rank = balance.rank_used;
    diag.balance_min_singular = balance.min_nonzero_singular;
    diag.balance_residual =
        balance_report(balance, treat_train, x_train, dict, moment).cwiseAbs().maxCoeff();
    diag.rowspace_residual = rowspace_residual(reg_outcome.gram, moment.m_hat, options.pinv_rel_tol);
    diagnostics[f].push_back(diag);
    if (reg_treatment) {
      FoldDiagnostics den = diag;
      den.stage = "treatment";
      den.regression_rank = reg_treatment->rank_used;
      den.regression_min_singular = reg_treatment->min_nonzero_singular;
      diagnostics[f].push_back(den);
    }

    const auto t = static_cast<Index>(test.size());
    Vector local = Vector::Ones(t);
    if (estimand.kind == Estimand::Kind::localized_ate) {
      Vector v_test(t);
      for (Index r = 0; r < t; ++r) v_test(r) = (*data.v)(test[static_cast<std::size_t>(r)]);
      local = kernel_weights(v_test, estimand.v, estimand.h, estimand.kernel);
    }

    RowVector z_row(n_pass + p);
    BoolRow observed_row(n_pass + p);
    for (Index r = 0; r < t; ++r) {
      const Index i = test[static_cast<std::size_t>(r)];
      z_row << fixed.row(i), data.z.values.row(i);
      observed_row << BoolRow::Constant(n_pass, true), data.z.observed.row(i);
      const double weight = local(r) * unit_weight(i);
      psi_num(i) = weight * influence_score(estimand, reg_outcome, balance, (*data.y)(i), treat(i),
                                            z_row, observed_row, n_pass);
      if (reg_treatment) {
        psi_den(i) = weight * influence_score(estimand, *reg_treatment, balance, (*data.d)(i),
                                              treat(i), z_row, observed_row, n_pass);
      }
    }
  };

  parallel_for(folds.size(), std::max(1u, options.threads), run_fold);

  InferenceResult result;
  if (!ratio) {
    result = summarize_scores(std::move(psi_num));
  } else {
    const double theta_num = pairwise_mean(psi_num);
    const double theta_den = pairwise_mean(psi_den);
    if (std::abs(theta_den) <= 1e-10) {
      throw WeakInstrumentError("first-stage estimate " + std::to_string(theta_den) +
                                " is too close to zero");
    }
    const double theta = theta_num / theta_den;
    // Linearized ratio: theta + ((psi_num - theta_num) - theta (psi_den - theta_den)) / theta_den.
    Vector psi(n);
    for (Index i = 0; i < n; ++i) {
      psi(i) = theta + ((psi_num(i) - theta_num) - theta * (psi_den(i) - theta_den)) / theta_den;
    }
    result = summarize_scores(std::move(psi));
    // Keep theta exactly equal to the ratio rather than the mean of the linearization.
    const double half = result.ci_high - result.theta_hat;
    result.theta_hat = theta;
    result.ci_low = theta - half;
    result.ci_high = theta + half;
    result.theta_numerator = theta_num;
    result.theta_denominator = theta_den;
  }
  for (auto& per_fold : diagnostics) {
    result.fold_diagnostics.insert(result.fold_diagnostics.end(), per_fold.begin(), per_fold.end());
  }
  return result;
}

}  // namespace dcci
