#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace dcci {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolRow = Eigen::Matrix<bool, 1, Eigen::Dynamic>;

// Value stored in unobserved cells. NaN so that an accidental read poisons
// every statistic it touches instead of silently biasing it.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// A matrix paired with its observation mask (true = observed). Entries where
/// the mask is false hold kMissing and are never read as values.
struct MaskedMatrix {
  Matrix values;
  BoolMatrix observed;

  MaskedMatrix() = default;
  MaskedMatrix(Matrix v, BoolMatrix m);
  // Fully observed.
  explicit MaskedMatrix(Matrix v);

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  // Checked accessor; in debug builds reading a masked cell aborts.
  double at(Index i, Index j) const;

  MaskedMatrix select_rows(const std::vector<Index>& rows) const;
  // Throws DimensionError if shapes disagree or an observed entry is not finite.
  void validate() const;
};

}  // namespace dcci
