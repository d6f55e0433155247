#include "dcci/eiv.hpp"

#include "dcci/error.hpp"
#include "dcci/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <string>

namespace dcci {

namespace {

struct SymmetricPinv {
  Matrix basis;   // retained eigenvectors
  Vector values;  // retained eigenvalues
};

SymmetricPinv symmetric_pinv(const Matrix& gram, double rel_tol) {
  if (gram.rows() != gram.cols()) throw DimensionError("gram matrix must be square");
  if (!gram.allFinite()) throw NumericalError("gram matrix contains non-finite values");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the gram matrix failed");
  const Vector& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < lambda.size(); ++i) {
    // A zero gram keeps nothing: its pseudoinverse is zero.
    if (top > 0.0 && lambda(i) > rel_tol * top) keep.push_back(i);
  }
  SymmetricPinv out;
  out.basis.resize(gram.rows(), static_cast<Index>(keep.size()));
  out.values.resize(static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.basis.col(static_cast<Index>(c)) = eig.eigenvectors().col(keep[c]);
    out.values(static_cast<Index>(c)) = lambda(keep[c]);
  }
  return out;
}

}  // namespace

EivFit fit_regression(const Matrix& b, const Vector& y, double rel_tol) {
  if (b.rows() != y.size()) {
    throw DimensionError("fit_regression: B has " + std::to_string(b.rows()) + " rows, y has " +
                         std::to_string(y.size()));
  }
  if (b.rows() == 0 || b.cols() == 0) throw DimensionError("fit_regression: empty design");
  if (!b.allFinite() || !y.allFinite()) throw NumericalError("fit_regression: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  if (!(top > 0.0)) throw DegenerateFitError("fit_regression: design matrix is all zeros");
  Index rank = 0;
  while (rank < s.size() && s(rank) > rel_tol * top) ++rank;

  EivFit fit;
  const Vector uty = svd.matrixU().leftCols(rank).transpose() * y;
  fit.coef = svd.matrixV().leftCols(rank) * uty.cwiseQuotient(s.head(rank));
  fit.gram = (b.transpose() * b) / static_cast<double>(b.rows());
  fit.rank_used = rank;
  fit.min_nonzero_singular = s(rank - 1);
  return fit;
}

CounterfactualMoment counterfactual_moment(const Estimand& estimand, const Vector& d_train,
                                           const Matrix& x_hat, const Dictionary& dict,
                                           Index n_passthrough, const Vector* row_weights) {
  check_compatible(estimand, dict);
  const Index m = x_hat.rows();
  if (d_train.size() != m) throw DimensionError("counterfactual_moment: D and Xhat rows differ");
  if (row_weights && row_weights->size() != m) {
    throw DimensionError("counterfactual_moment: weights and Xhat rows differ");
  }
  if (m == 0) throw DimensionError("counterfactual_moment: empty training fold");
  Matrix rows(m, dict.p_out());
  for (Index i = 0; i < m; ++i) {
    Vector row = moment_row(estimand, dict, d_train(i), x_hat.row(i).transpose(), n_passthrough);
    if (row_weights) row *= (*row_weights)(i);
    rows.row(i) = row.transpose();
  }
  return CounterfactualMoment{column_means(rows).transpose(), estimand.kind};
}

EivFit fit_balance(const Matrix& gram, const CounterfactualMoment& moment, double rel_tol) {
  if (gram.rows() != moment.m_hat.size()) {
    throw DimensionError("fit_balance: gram is " + std::to_string(gram.rows()) +
                         " wide, moment has " + std::to_string(moment.m_hat.size()) + " entries");
  }
  const SymmetricPinv pinv = symmetric_pinv(gram, rel_tol);
  EivFit fit;
  const Vector coords = pinv.basis.transpose() * moment.m_hat;
  fit.coef = pinv.basis * coords.cwiseQuotient(pinv.values);
  fit.gram = gram;
  fit.rank_used = pinv.values.size();
  fit.min_nonzero_singular = pinv.values.size() > 0 ? pinv.values.minCoeff() : 0.0;
  return fit;
}

void bind(EivFit& fit, const Dictionary& dict, const Vector& rho_hat) {
  if (fit.coef.size() != dict.p_out()) {
    throw DimensionError("bind: coefficient length " + std::to_string(fit.coef.size()) +
                         " does not match dictionary width " + std::to_string(dict.p_out()));
  }
  if (rho_hat.size() != dict.p_in()) {
    throw DimensionError("bind: rho_hat length does not match dictionary input width");
  }
  fit.dict = dict;
  fit.rho_hat = rho_hat;
  fit.absorbed = fit.coef;
  for (Index j = 0; j < dict.p_out(); ++j) {
    if (const auto c = dict.covariate_of(j)) fit.absorbed(j) /= rho_hat(*c);
  }
}

double predict(const EivFit& fit, double d, const Eigen::Ref<const RowVector>& z,
               const Eigen::Ref<const BoolRow>& observed) {
  if (!fit.dict) throw ConfigurationError("predict: fit is not bound to a dictionary");
  if (z.size() != fit.dict->p_in() || observed.size() != z.size()) {
    throw DimensionError("predict: row has " + std::to_string(z.size()) + " entries, expected " +
                         std::to_string(fit.dict->p_in()));
  }
  Vector zero_filled(z.size());
  for (Index j = 0; j < z.size(); ++j) zero_filled(j) = observed(j) ? z(j) : 0.0;
  return fit.dict->apply(d, zero_filled).dot(fit.absorbed);
}

Vector balance_report(const EivFit& balance, const Vector& d_train, const Matrix& x_hat,
                      const Dictionary& dict, const CounterfactualMoment& moment) {
  const Matrix b = dict.apply_matrix(d_train, x_hat);
  const Vector omega = b * balance.coef;
  const Matrix weighted = omega.asDiagonal() * b;
  return column_means(weighted).transpose() - moment.m_hat;
}

double rowspace_residual(const Matrix& gram, const Vector& m_hat, double rel_tol) {
  if (m_hat.size() == 0 || m_hat.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const SymmetricPinv pinv = symmetric_pinv(gram, rel_tol);
  const Vector projected = pinv.basis * (pinv.basis.transpose() * m_hat);
  return (m_hat - projected).cwiseAbs().maxCoeff();
}

}  // namespace dcci
