#pragma once

#include "dcci/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcci {

/// Low-rank signal X = U V^T with its generative rank.
struct SignalMatrix {
  Matrix values;
  Index rank = 0;
};

enum class NoiseKind { none, gaussian, laplace, discretize_poisson };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

/// How the covariates are corrupted: Z = (X + H) ⊙ π.
struct CorruptionSpec {
  NoiseKind noise = NoiseKind::none;
  // Standard deviation of H for gaussian and laplace (laplace scale is
  // sigma_h / sqrt(2)). Ignored for discretize_poisson.
  double sigma_h = 0.0;
  // Per-column observation probabilities. Empty means fully observed, a
  // single entry is broadcast to every column.
  std::vector<double> rho;
  // Within-row dependent missingness (see corrupt()). Off by default.
  bool correlated_missing = false;
  // Restrict additive noise to the first `noisy_columns` columns.
  std::optional<Index> noisy_columns;
  std::uint64_t seed = 0;

  // Throws ConfigurationError on sigma_h < 0 or any rho outside (0, 1].
  void validate(Index p) const;
  double rho_for(Index j) const;
};

/// Observed data. Y and D are absent when only covariates were generated.
struct CorruptedDataset {
  std::optional<Vector> y;
  std::optional<Vector> d;
  MaskedMatrix z;
  std::optional<Vector> weights;
  std::optional<Vector> v;
  std::optional<Vector> instrument;
  std::optional<double> theta_true;

  Index rows() const { return z.rows(); }
  Index cols() const { return z.cols(); }
  // Throws DimensionError if any present vector disagrees with z on n.
  void validate() const;
};

SignalMatrix generate_factor_signal(Index n, Index p, Index r, std::uint64_t seed);

// Additive noise H for every entry of x under the spec's noise kind, drawn
// from stream `stream` of spec.seed. For discretize_poisson, H = Z - X.
Matrix draw_noise(const Matrix& x, const CorruptionSpec& spec, std::uint64_t stream);

// Observation mask under the spec's rho (independent MCAR, or the
// row-factor scheme when correlated_missing is set).
BoolMatrix draw_mask(Index n, Index p, const CorruptionSpec& spec);

CorruptedDataset corrupt(const SignalMatrix& x, const CorruptionSpec& spec);

// Entrywise Monte Carlo mean of H = (Z before masking) - X over reps draws.
Matrix conditional_mean_check(const SignalMatrix& x, const CorruptionSpec& spec, Index reps);

// Truncated logistic used for the simulated propensity: 0.90 * logistic(t) + 0.05.
double truncated_logistic(double t);

inline constexpr double kSimulatedTheta = 2.2;

/// Factor-model DGP with treatment, outcome and corrupted covariates.
///   beta_j = j^-2, D ~ Bernoulli(truncated_logistic(0.25 X beta)),
///   Y = 2.2 D + 1.2 X beta + D X_1 + eps.
/// The signal matrix and propensities are returned alongside for oracles.
struct SimulatedDraw {
  CorruptedDataset data;
  SignalMatrix signal;
  Vector propensity;
};

SimulatedDraw simulate_dgp_full(Index n, Index p, Index r, const CorruptionSpec& spec,
                                std::uint64_t seed);
CorruptedDataset simulate_dgp(Index n, Index p, Index r, const CorruptionSpec& spec,
                              std::uint64_t seed);

// sigma_h for a target noise-to-signal ratio when Var(X) = signal_variance.
double sigma_for_ratio(double ratio, double signal_variance);

}  // namespace dcci
