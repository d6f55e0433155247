#pragma once

#include "dcci/dictionary.hpp"
#include "dcci/types.hpp"

#include <string>

namespace dcci {

enum class Kernel { gaussian, epanechnikov };

std::string to_string(Kernel kernel);
Kernel parse_kernel(const std::string& name);
double kernel_value(Kernel kernel, double u);

/// Which causal parameter to estimate. The counterfactual-moment row and the
/// score's m(w, gamma) term are the only parts of the pipeline that differ
/// between estimands.
struct Estimand {
  enum class Kind {
    ate,
    policy_affine,       // t(x) = t1 ⊙ x + t2
    average_derivative,
    partially_linear,
    pliv,                // ratio of two partially linear functionals
    late,                // ratio of two ATE functionals
    localized_ate,       // ATE localized at V = v with bandwidth h
  };

  Kind kind = Kind::ate;
  Vector t1;
  Vector t2;
  bool use_weights = false;
  double v = 0.0;
  double h = 1.0;
  Kernel kernel = Kernel::gaussian;

  static Estimand ate() { return {}; }
  static Estimand late();
  static Estimand policy(Vector t1, Vector t2);
  static Estimand average_derivative();
  static Estimand partially_linear(bool weighted = false);
  static Estimand pliv(bool weighted = false);
  static Estimand localized_ate(double v, double h, Kernel kernel = Kernel::gaussian);

  bool is_ratio() const { return kind == Kind::late || kind == Kind::pliv; }
  DictKind required_dictionary() const;
  std::string name() const;
  // p is the number of corrupted covariates (policy vectors must match it).
  void validate(Index p) const;
};

// CLI names: ate, late, policy, derivative, plinear, pliv, cate.
Estimand::Kind parse_estimand_kind(const std::string& name);
std::string to_string(Estimand::Kind kind);

// Throws ConfigurationError when the estimand needs another dictionary.
void check_compatible(const Estimand& estimand, const Dictionary& dict);

/// Counterfactual moment row m(w, b) for one unit: the dictionary-level
/// linear functional whose dot product with a coefficient vector gives
/// m(w, gamma). x holds `n_passthrough` uncorrupted columns first, followed
/// by the covariates the policy map acts on.
///   ATE / LATE / localized:   b(1, x) - b(0, x)
///   policy:                   b(t(x)) - b(x)
///   derivative:               d/dd b(d, x)
///   partially linear / PLIV:  b(d + 1, x) - b(d, x) = (1, 0, ..., 0)
Vector moment_row(const Estimand& estimand, const Dictionary& dict, double d, const Vector& x,
                  Index n_passthrough = 0);

}  // namespace dcci
