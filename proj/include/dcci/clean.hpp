#pragma once

#include "dcci/types.hpp"

namespace dcci {

/// What fit_cleaning learned on a training fold. Immutable once built.
struct CleaningModel {
  // Observation rates, floored at 1 / m_train.
  Vector rho_hat;
  Index k = 0;
  // Full spectrum of the filled training matrix, nonincreasing.
  Vector singular_values;
  Matrix left_vectors;   // m x k
  Matrix right_vectors;  // p x k
  Index m_train = 0;
};

struct CleanedMatrix {
  Matrix values;
};

struct CleaningResult {
  CleanedMatrix cleaned;
  CleaningModel model;
};

// rho_hat_j = max(#observed in column j / m, 1 / m).
Vector estimate_rates(const MaskedMatrix& z);

// Observed entries become z_ij / rho_hat_j, missing entries become 0.
// rho_hat may come from a different fold than z.
Matrix fill(const MaskedMatrix& z, const Vector& rho_hat);
Vector fill_row(const Eigen::Ref<const RowVector>& values, const Eigen::Ref<const BoolRow>& observed,
                const Vector& rho_hat);

// Rank-k truncated SVD U_k S_k V_k^T. The returned model carries the
// spectrum and singular vectors; rho_hat is left empty.
CleaningResult pca_truncate(const Matrix& m, Index k);

// estimate_rates -> fill -> pca_truncate on a training fold.
CleaningResult fit_cleaning(const MaskedMatrix& z_train, Index k);

// Singular values, nonincreasing. A masked input is filled with its own rates first.
Vector scree(const Matrix& x);
Vector scree(const MaskedMatrix& z);

// Elbow heuristic: the largest index (1-based count) whose singular value
// exceeds `fraction` of the top one. Never applied implicitly.
Index suggest_k(const Vector& singular_values, double fraction = 0.2);

}  // namespace dcci
