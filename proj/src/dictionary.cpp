#include "dcci/dictionary.hpp"

#include "dcci/error.hpp"

#include <string>

namespace dcci {

namespace {

Index output_dim(DictKind kind, Index p) {
  switch (kind) {
    case DictKind::identity: return p;
    case DictKind::interacted: return 2 * p;
    case DictKind::partially_linear: return 1 + p;
    case DictKind::quadratic_interacted: return 3 + 3 * p;
    case DictKind::custom: break;
  }
  throw ConfigurationError("custom dictionaries need an explicit output dimension");
}

}  // namespace

std::string to_string(DictKind kind) {
  switch (kind) {
    case DictKind::identity: return "identity";
    case DictKind::interacted: return "interacted";
    case DictKind::partially_linear: return "plinear";
    case DictKind::quadratic_interacted: return "quad";
    case DictKind::custom: return "custom";
  }
  return "custom";
}

DictKind parse_dict_kind(const std::string& name) {
  if (name == "identity") return DictKind::identity;
  if (name == "interacted") return DictKind::interacted;
  if (name == "plinear" || name == "partially_linear") return DictKind::partially_linear;
  if (name == "quad" || name == "quadratic_interacted") return DictKind::quadratic_interacted;
  throw ConfigurationError("unknown dictionary '" + name + "'");
}

Dictionary::Dictionary(DictKind kind, Index p_in)
    : Dictionary(kind, p_in, output_dim(kind, p_in), nullptr) {}

Dictionary::Dictionary(DictKind kind, Index p_in, Index p_out, RowFunction fn)
    : kind_(kind), p_in_(p_in), p_out_(p_out), custom_(std::move(fn)) {
  if (p_in < 1) throw DimensionError("Dictionary: p_in must be positive");
}

Dictionary Dictionary::custom(Index p_in, Index p_out, RowFunction fn) {
  if (!fn) throw ConfigurationError("custom dictionary needs a row function");
  return Dictionary(DictKind::custom, p_in, p_out, std::move(fn));
}

void Dictionary::check_row(const Vector& x) const {
  if (x.size() != p_in_) {
    throw DimensionError("dictionary expects rows of length " + std::to_string(p_in_) + ", got " +
                         std::to_string(x.size()));
  }
}

Vector Dictionary::apply(double d, const Vector& x) const {
  check_row(x);
  const Index p = p_in_;
  Vector out(p_out_);
  switch (kind_) {
    case DictKind::identity:
      out = x;
      break;
    case DictKind::interacted:
      out.head(p) = d * x;
      out.tail(p) = (1.0 - d) * x;
      break;
    case DictKind::partially_linear:
      out(0) = d;
      out.tail(p) = x;
      break;
    case DictKind::quadratic_interacted:
      out(0) = 1.0;
      out(1) = d;
      out(2) = d * d;
      out.segment(3, p) = x;
      out.segment(3 + p, p) = d * x;
      out.segment(3 + 2 * p, p) = (d * d) * x;
      break;
    case DictKind::custom: {
      out = custom_(d, x);
      if (out.size() != p_out_) throw DimensionError("custom dictionary returned wrong length");
      break;
    }
  }
  return out;
}

Matrix Dictionary::apply_matrix(const Vector& d, const Matrix& x) const {
  if (d.size() != x.rows()) {
    throw DimensionError("apply_matrix: D has " + std::to_string(d.size()) + " rows, X has " +
                         std::to_string(x.rows()));
  }
  if (x.cols() != p_in_) {
    throw DimensionError("apply_matrix: X has " + std::to_string(x.cols()) +
                         " columns, dictionary expects " + std::to_string(p_in_));
  }
  const Index n = x.rows();
  const Index p = p_in_;
  Matrix out(n, p_out_);
  switch (kind_) {
    case DictKind::identity:
      out = x;
      break;
    case DictKind::interacted:
      out.leftCols(p) = d.asDiagonal() * x;
      out.rightCols(p) = (Vector::Ones(n) - d).asDiagonal() * x;
      break;
    case DictKind::partially_linear:
      out.col(0) = d;
      out.rightCols(p) = x;
      break;
    case DictKind::quadratic_interacted: {
      const Vector d2 = d.cwiseProduct(d);
      out.col(0).setOnes();
      out.col(1) = d;
      out.col(2) = d2;
      out.middleCols(3, p) = x;
      out.middleCols(3 + p, p) = d.asDiagonal() * x;
      out.middleCols(3 + 2 * p, p) = d2.asDiagonal() * x;
      break;
    }
    case DictKind::custom:
      for (Index i = 0; i < n; ++i) out.row(i) = apply(d(i), x.row(i).transpose()).transpose();
      break;
  }
  return out;
}

Vector Dictionary::derivative(double d, const Vector& x) const {
  check_row(x);
  const Index p = p_in_;
  Vector out = Vector::Zero(p_out_);
  switch (kind_) {
    case DictKind::identity:
      break;
    case DictKind::interacted:
      out.head(p) = x;
      out.tail(p) = -x;
      break;
    case DictKind::partially_linear:
      out(0) = 1.0;
      break;
    case DictKind::quadratic_interacted:
      out(1) = 1.0;
      out(2) = 2.0 * d;
      out.segment(3 + p, p) = x;
      out.segment(3 + 2 * p, p) = (2.0 * d) * x;
      break;
    case DictKind::custom:
      throw ConfigurationError("custom dictionaries have no analytic derivative");
  }
  return out;
}

std::optional<Index> Dictionary::covariate_of(Index column) const {
  const Index p = p_in_;
  switch (kind_) {
    case DictKind::identity: return column;
    case DictKind::interacted: return column % p;
    case DictKind::partially_linear:
      if (column == 0) return std::nullopt;
      return column - 1;
    case DictKind::quadratic_interacted:
      if (column < 3) return std::nullopt;
      return (column - 3) % p;
    case DictKind::custom: break;
  }
  throw ConfigurationError("custom dictionaries have no declared covariate layout");
}

}  // namespace dcci
