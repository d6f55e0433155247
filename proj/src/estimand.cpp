#include "dcci/estimand.hpp"

#include "dcci/error.hpp"

#include <cmath>
#include <numbers>

namespace dcci {

std::string to_string(Kernel kernel) {
  return kernel == Kernel::gaussian ? "gaussian" : "epanechnikov";
}

Kernel parse_kernel(const std::string& name) {
  if (name == "gaussian") return Kernel::gaussian;
  if (name == "epanechnikov") return Kernel::epanechnikov;
  throw ConfigurationError("unknown kernel '" + name + "'");
}

double kernel_value(Kernel kernel, double u) {
  switch (kernel) {
    case Kernel::gaussian: return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case Kernel::epanechnikov: return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

Estimand Estimand::late() {
  Estimand e;
  e.kind = Kind::late;
  return e;
}

Estimand Estimand::policy(Vector t1, Vector t2) {
  Estimand e;
  e.kind = Kind::policy_affine;
  e.t1 = std::move(t1);
  e.t2 = std::move(t2);
  return e;
}

Estimand Estimand::average_derivative() {
  Estimand e;
  e.kind = Kind::average_derivative;
  return e;
}

Estimand Estimand::partially_linear(bool weighted) {
  Estimand e;
  e.kind = Kind::partially_linear;
  e.use_weights = weighted;
  return e;
}

Estimand Estimand::pliv(bool weighted) {
  Estimand e;
  e.kind = Kind::pliv;
  e.use_weights = weighted;
  return e;
}

Estimand Estimand::localized_ate(double v, double h, Kernel kernel) {
  Estimand e;
  e.kind = Kind::localized_ate;
  e.v = v;
  e.h = h;
  e.kernel = kernel;
  return e;
}

DictKind Estimand::required_dictionary() const {
  switch (kind) {
    case Kind::ate:
    case Kind::late:
    case Kind::localized_ate: return DictKind::interacted;
    case Kind::policy_affine: return DictKind::identity;
    case Kind::average_derivative: return DictKind::quadratic_interacted;
    case Kind::partially_linear:
    case Kind::pliv: return DictKind::partially_linear;
  }
  return DictKind::interacted;
}

std::string to_string(Estimand::Kind kind) {
  switch (kind) {
    case Estimand::Kind::ate: return "ate";
    case Estimand::Kind::policy_affine: return "policy";
    case Estimand::Kind::average_derivative: return "derivative";
    case Estimand::Kind::partially_linear: return "plinear";
    case Estimand::Kind::pliv: return "pliv";
    case Estimand::Kind::late: return "late";
    case Estimand::Kind::localized_ate: return "cate";
  }
  return "ate";
}

Estimand::Kind parse_estimand_kind(const std::string& name) {
  if (name == "ate") return Estimand::Kind::ate;
  if (name == "late") return Estimand::Kind::late;
  if (name == "policy") return Estimand::Kind::policy_affine;
  if (name == "derivative") return Estimand::Kind::average_derivative;
  if (name == "plinear") return Estimand::Kind::partially_linear;
  if (name == "pliv") return Estimand::Kind::pliv;
  if (name == "cate" || name == "localized_ate") return Estimand::Kind::localized_ate;
  throw ConfigurationError("unknown estimand '" + name + "'");
}

std::string Estimand::name() const { return to_string(kind); }

void Estimand::validate(Index p) const {
  if (kind == Kind::policy_affine) {
    if (t1.size() != p || t2.size() != p) {
      throw ConfigurationError("policy vectors t1 and t2 must have one entry per covariate (" +
                               std::to_string(p) + ")");
    }
  }
  if (kind == Kind::localized_ate && !(h > 0.0)) {
    throw ConfigurationError("localization bandwidth h must be positive");
  }
}

void check_compatible(const Estimand& estimand, const Dictionary& dict) {
  if (dict.kind() == DictKind::custom) {
    throw ConfigurationError("custom dictionaries are excluded from moment and balance automation");
  }
  if (dict.kind() != estimand.required_dictionary()) {
    throw ConfigurationError("estimand '" + estimand.name() + "' requires the '" +
                             to_string(estimand.required_dictionary()) + "' dictionary, got '" +
                             to_string(dict.kind()) + "'");
  }
}

Vector moment_row(const Estimand& estimand, const Dictionary& dict, double d, const Vector& x,
                  Index n_passthrough) {
  switch (estimand.kind) {
    case Estimand::Kind::ate:
    case Estimand::Kind::late:
    case Estimand::Kind::localized_ate:
      return dict.apply(1.0, x) - dict.apply(0.0, x);
    case Estimand::Kind::policy_affine: {
      const Index p = x.size() - n_passthrough;
      if (estimand.t1.size() != p || estimand.t2.size() != p) {
        throw DimensionError("policy vectors do not match the covariate count");
      }
      Vector moved = x;
      moved.tail(p) = estimand.t1.cwiseProduct(x.tail(p)) + estimand.t2;
      return dict.apply(d, moved) - dict.apply(d, x);
    }
    case Estimand::Kind::average_derivative:
      return dict.derivative(d, x);
    case Estimand::Kind::partially_linear:
    case Estimand::Kind::pliv:
      return dict.apply(d + 1.0, x) - dict.apply(d, x);
  }
  throw ConfigurationError("unsupported estimand");
}

}  // namespace dcci
