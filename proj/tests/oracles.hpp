#pragma once

// Independent reference implementations. Nothing here calls into the
// library's linear algebra paths; decompositions go through symmetric
// eigensolvers on normal matrices instead of SVD.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Right singular vectors and singular values from eig(M^T M), sorted descending.
inline void gram_svd(const Matrix& m, Matrix& v, Vector& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.transpose() * m);
  const Eigen::Index p = m.cols();
  v.resize(p, p);
  s.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    v.col(i) = eig.eigenvectors().col(p - 1 - i);
    s(i) = std::sqrt(std::max(0.0, eig.eigenvalues()(p - 1 - i)));
  }
}

// Best rank-k approximation as M V_k V_k^T.
inline Matrix truncate(const Matrix& m, Eigen::Index k) {
  Matrix v;
  Vector s;
  gram_svd(m, v, s);
  const Matrix vk = v.leftCols(k);
  return m * vk * vk.transpose();
}

// Minimal-norm least squares via eig(B^T B): beta = sum over kept eigenpairs
// of u (u^T B^T y) / lambda.
inline Vector min_norm_solve(const Matrix& b, const Vector& y, double rel_tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b.transpose() * b);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  const Vector rhs = b.transpose() * y;
  Vector beta = Vector::Zero(b.cols());
  for (Eigen::Index i = 0; i < b.cols(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    // Eigenvalues of B^T B are squared singular values.
    if (lambda > rel_tol * rel_tol * top && lambda > 0.0) {
      const Vector u = eig.eigenvectors().col(i);
      beta += u * (u.dot(rhs) / lambda);
    }
  }
  return beta;
}

// Pseudoinverse solve of a symmetric PSD system by explicit eigenpairs.
inline Vector psd_solve(const Matrix& g, const Vector& rhs, double rel_tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  Vector x = Vector::Zero(g.cols());
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda > rel_tol * top) {
      const Vector u = eig.eigenvectors().col(i);
      x += u * (u.dot(rhs) / lambda);
    }
  }
  return x;
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

inline double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return static_cast<double>(s / v.size());
}

}  // namespace oracle
