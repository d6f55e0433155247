#pragma once

#include "dcci/corrupt.hpp"
#include "dcci/types.hpp"

#include <cstdint>
#include <variant>

namespace dcci {

// Laplace mechanisms here are parametrized by the scale b (variance 2 b^2).
// corrupt() takes a standard deviation instead; use the converters below.
inline double laplace_variance(double scale) { return 2.0 * scale * scale; }
inline double laplace_sigma_from_scale(double scale) { return std::sqrt(2.0) * scale; }
inline double laplace_scale_from_sigma(double sigma) { return sigma / std::sqrt(2.0); }

/// Central (aggregate) release: unit i averages L_i individuals whose entries
/// are bounded by A_bar_i, and p statistics are published per unit.
struct CentralDpSpec {
  double epsilon = 1.0;
  Index p = 1;
  Vector a_bar;
  Vector units;  // L_i >= 1

  void validate() const;
};

/// Per-instance (microdata) release: the first T of the covariates are privatized.
struct MicroDpSpec {
  double epsilon = 1.0;
  Index t = 1;
  double a_bar = 1.0;

  void validate() const;
};

struct SubExponentialBound {
  double k_a = 0.0;
  double kappa = 0.0;
};

// scale_i = 2 A_bar_i p / (epsilon L_i).
Vector central_scale(const CentralDpSpec& spec);
// K_a, kappa <= max_i 2^{3/2} A_bar_i p / (epsilon L_i).
SubExponentialBound central_subexp_bound(const CentralDpSpec& spec);

// 2 A_bar T / epsilon.
double micro_scale(const MicroDpSpec& spec);
SubExponentialBound micro_subexp_bound(const MicroDpSpec& spec);

struct PoverLReport {
  double max_p_over_l = 0.0;
  double log_np = 0.0;
  bool passes = false;
};

// Advisory: published variables per aggregate unit against ln(n p).
PoverLReport p_over_l_diagnostic(const CentralDpSpec& spec, Index n, Index p);

// Adds Laplace noise per the regime. Central: row i gets scale_i on every
// column. Micro: only the first T columns are perturbed.
CorruptedDataset privatize(const Matrix& x, const std::variant<CentralDpSpec, MicroDpSpec>& spec,
                           std::uint64_t seed);

}  // namespace dcci
