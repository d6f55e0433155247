#pragma once

#include "dcci/dictionary.hpp"
#include "dcci/estimand.hpp"
#include "dcci/types.hpp"

#include <optional>

namespace dcci {

inline constexpr double kPinvRelTol = 1e-10;

/// Error-in-variable coefficient (regression beta or balancing eta) learned on
/// a cleaned training fold, plus what prediction on raw test rows needs.
struct EivFit {
  Vector coef;
  // (1/m) B^T B of the cleaned dictionary matrix.
  Matrix gram;
  Index rank_used = 0;
  // Smallest singular value kept by the pseudoinverse. Values near zero mean
  // the fit is poorly conditioned.
  double min_nonzero_singular = 0.0;

  // Set by bind(); prediction uses coef with 1/rho_hat folded into every
  // covariate-linear column so a test row needs one dot product.
  std::optional<Dictionary> dict;
  Vector rho_hat;
  Vector absorbed;
};

struct CounterfactualMoment {
  Vector m_hat;
  Estimand::Kind tag = Estimand::Kind::ate;
};

// beta = (B^T B)^+ B^T y through a truncated SVD of B (minimal norm).
EivFit fit_regression(const Matrix& b, const Vector& y, double rel_tol = kPinvRelTol);

// Mean over training rows of moment_row(D_i, Xhat_i), optionally multiplied
// row-wise by `row_weights`.
CounterfactualMoment counterfactual_moment(const Estimand& estimand, const Vector& d_train,
                                           const Matrix& x_hat, const Dictionary& dict,
                                           Index n_passthrough = 0,
                                           const Vector* row_weights = nullptr);

// eta = G^+ M with G = (1/m) B^T B and M the row-mean moment.
EivFit fit_balance(const Matrix& gram, const CounterfactualMoment& moment,
                   double rel_tol = kPinvRelTol);

// Attach the dictionary and training observation rates used for prediction.
// rho_hat covers every dictionary input column (1 for uncorrupted ones).
void bind(EivFit& fit, const Dictionary& dict, const Vector& rho_hat);

// b(d, fill(z; rho_hat_train)) . coef for one raw test row. The row is never
// projected onto principal components.
double predict(const EivFit& fit, double d, const Eigen::Ref<const RowVector>& z,
               const Eigen::Ref<const BoolRow>& observed);

// (1/m) sum_i b(D_i, Xhat_i) (b(D_i, Xhat_i) . eta) - M.
Vector balance_report(const EivFit& balance, const Vector& d_train, const Matrix& x_hat,
                      const Dictionary& dict, const CounterfactualMoment& moment);

// Max-abs residual of projecting M onto the row space of the cleaned
// dictionary matrix (the range of G).
double rowspace_residual(const Matrix& gram, const Vector& m_hat, double rel_tol = kPinvRelTol);

}  // namespace dcci
