#pragma once

#include "dcci/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace dcci {

enum class DictKind { identity, interacted, partially_linear, quadratic_interacted, custom };

std::string to_string(DictKind kind);
// Accepts the CLI spellings: identity, interacted, plinear, quad.
DictKind parse_dict_kind(const std::string& name);

/// Maps (treatment d, covariate row x) to technical regressors.
///
/// Column layouts (fixed; they define coefficient indexing):
///   identity              x                          p
///   interacted            (d x, (1 - d) x)           2p
///   partially_linear      (d, x)                     1 + p
///   quadratic_interacted  (1, d, d^2, x, d x, d^2 x) 3 + 3p
/// Every layout is linear in x for fixed d.
class Dictionary {
 public:
  using RowFunction = std::function<Vector(double, const Vector&)>;

  Dictionary(DictKind kind, Index p_in);
  // User-supplied row map. Not eligible for moment/balance automation.
  static Dictionary custom(Index p_in, Index p_out, RowFunction fn);

  DictKind kind() const { return kind_; }
  Index p_in() const { return p_in_; }
  Index p_out() const { return p_out_; }

  Vector apply(double d, const Vector& x) const;
  Matrix apply_matrix(const Vector& d, const Matrix& x) const;

  // Derivative of apply(d, x) with respect to d.
  Vector derivative(double d, const Vector& x) const;

  // For each output column, the covariate index it is linear in, or nothing
  // when the column does not involve covariates.
  std::optional<Index> covariate_of(Index column) const;

 private:
  Dictionary(DictKind kind, Index p_in, Index p_out, RowFunction fn);
  void check_row(const Vector& x) const;

  DictKind kind_;
  Index p_in_;
  Index p_out_;
  RowFunction custom_;
};

}  // namespace dcci
