#include "dcci/types.hpp"

#include "dcci/error.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace dcci {

MaskedMatrix::MaskedMatrix(Matrix v, BoolMatrix m) : values(std::move(v)), observed(std::move(m)) {
  if (values.rows() != observed.rows() || values.cols() != observed.cols()) {
    throw DimensionError("MaskedMatrix: values and mask shapes differ");
  }
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index i = 0; i < values.rows(); ++i) {
      if (!observed(i, j)) values(i, j) = kMissing;
    }
  }
}

MaskedMatrix::MaskedMatrix(Matrix v)
    : values(std::move(v)), observed(BoolMatrix::Constant(values.rows(), values.cols(), true)) {}

double MaskedMatrix::at(Index i, Index j) const {
  assert(observed(i, j) && "read of a masked entry");
  return values(i, j);
}

MaskedMatrix MaskedMatrix::select_rows(const std::vector<Index>& rows) const {
  MaskedMatrix out;
  out.values.resize(static_cast<Index>(rows.size()), cols());
  out.observed.resize(static_cast<Index>(rows.size()), cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.values.row(static_cast<Index>(r)) = values.row(rows[r]);
    out.observed.row(static_cast<Index>(r)) = observed.row(rows[r]);
  }
  return out;
}

void MaskedMatrix::validate() const {
  if (values.rows() != observed.rows() || values.cols() != observed.cols()) {
    throw DimensionError("MaskedMatrix: values and mask shapes differ");
  }
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index i = 0; i < values.rows(); ++i) {
      if (observed(i, j) && !std::isfinite(values(i, j))) {
        throw DimensionError("MaskedMatrix: non-finite observed entry at (" + std::to_string(i) +
                             ", " + std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace dcci
