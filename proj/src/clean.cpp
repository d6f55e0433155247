#include "dcci/clean.hpp"

#include "dcci/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace dcci {

namespace {

Eigen::BDCSVD<Matrix> decompose(const Matrix& m, unsigned options) {
  if (!m.allFinite()) {
    throw NumericalError("SVD input contains non-finite values");
  }
  Eigen::BDCSVD<Matrix> svd(m, options);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD failed to converge on a " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix (Frobenius norm " +
                         std::to_string(m.norm()) + ")");
  }
  return svd;
}

}  // namespace

Vector estimate_rates(const MaskedMatrix& z) {
  const Index m = z.rows();
  if (m < 1 || z.cols() < 1) throw DimensionError("estimate_rates: empty matrix");
  const double floor = 1.0 / static_cast<double>(m);
  Vector rho(z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    const Index count = z.observed.col(j).count();
    rho(j) = std::max(static_cast<double>(count) / static_cast<double>(m), floor);
  }
  return rho;
}

Matrix fill(const MaskedMatrix& z, const Vector& rho_hat) {
  if (rho_hat.size() != z.cols()) {
    throw DimensionError("fill: rho_hat has " + std::to_string(rho_hat.size()) +
                         " entries for " + std::to_string(z.cols()) + " columns");
  }
  Matrix out(z.rows(), z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    for (Index i = 0; i < z.rows(); ++i) {
      out(i, j) = z.observed(i, j) ? z.values(i, j) / rho_hat(j) : 0.0;
    }
  }
  return out;
}

Vector fill_row(const Eigen::Ref<const RowVector>& values, const Eigen::Ref<const BoolRow>& observed,
                const Vector& rho_hat) {
  if (values.size() != rho_hat.size() || observed.size() != rho_hat.size()) {
    throw DimensionError("fill_row: row length does not match rho_hat");
  }
  Vector out(values.size());
  for (Index j = 0; j < values.size(); ++j) {
    out(j) = observed(j) ? values(j) / rho_hat(j) : 0.0;
  }
  return out;
}

CleaningResult pca_truncate(const Matrix& m, Index k) {
  if (k < 1 || k > std::min(m.rows(), m.cols())) {
    throw ConfigurationError("pca_truncate: need 1 <= k <= min(rows, cols), got k=" +
                             std::to_string(k) + " for a " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + " matrix");
  }
  const auto svd = decompose(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CleaningResult out;
  out.model.k = k;
  out.model.m_train = m.rows();
  out.model.singular_values = svd.singularValues();
  out.model.left_vectors = svd.matrixU().leftCols(k);
  out.model.right_vectors = svd.matrixV().leftCols(k);
  out.cleaned.values = out.model.left_vectors *
                       out.model.singular_values.head(k).asDiagonal() *
                       out.model.right_vectors.transpose();
  return out;
}

CleaningResult fit_cleaning(const MaskedMatrix& z_train, Index k) {
  Vector rho = estimate_rates(z_train);
  CleaningResult out = pca_truncate(fill(z_train, rho), k);
  out.model.rho_hat = std::move(rho);
  return out;
}

Vector scree(const Matrix& x) {
  if (x.size() == 0) return Vector();
  return decompose(x, 0).singularValues();
}

Vector scree(const MaskedMatrix& z) { return scree(fill(z, estimate_rates(z))); }

Index suggest_k(const Vector& singular_values, double fraction) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values(0);
  Index k = 0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > fraction * top) k = i + 1;
  }
  return std::max<Index>(k, 1);
}

}  // namespace dcci
