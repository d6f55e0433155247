#include "dcci/corrupt.hpp"

#include "dcci/error.hpp"
#include "dcci/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dcci {

namespace {

constexpr std::uint64_t kSignalStream = 0x01;
constexpr std::uint64_t kOutcomeStream = 0x02;
constexpr std::uint64_t kNoiseStream = 0x10;
constexpr std::uint64_t kMaskStream = 0x20;
constexpr std::uint64_t kCheckStreamBase = 0x1000;

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::laplace: return "laplace";
    case NoiseKind::discretize_poisson: return "discretize";
  }
  return "none";
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "none") return NoiseKind::none;
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "laplace") return NoiseKind::laplace;
  if (name == "discretize" || name == "discretize_poisson") return NoiseKind::discretize_poisson;
  throw ConfigurationError("unknown noise kind '" + name + "'");
}

void CorruptionSpec::validate(Index p) const {
  if (!(sigma_h >= 0.0) || !std::isfinite(sigma_h)) {
    throw ConfigurationError("sigma_h must be finite and nonnegative");
  }
  if (rho.size() > 1 && static_cast<Index>(rho.size()) != p) {
    throw ConfigurationError("rho must be empty, a single value, or one value per column");
  }
  for (double r : rho) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigurationError("every rho_j must lie in (0, 1]");
  }
  if (noisy_columns && (*noisy_columns < 0 || *noisy_columns > p)) {
    throw ConfigurationError("noisy_columns must lie in [0, p]");
  }
}

double CorruptionSpec::rho_for(Index j) const {
  if (rho.empty()) return 1.0;
  if (rho.size() == 1) return rho.front();
  return rho[static_cast<std::size_t>(j)];
}

void CorruptedDataset::validate() const {
  z.validate();
  const Index n = z.rows();
  auto check = [n](const std::optional<Vector>& v, const char* name) {
    if (v && v->size() != n) {
      throw DimensionError(std::string("dataset: ") + name + " has " + std::to_string(v->size()) +
                           " rows, covariates have " + std::to_string(n));
    }
  };
  check(y, "Y");
  check(d, "D");
  check(weights, "weights");
  check(v, "V");
  check(instrument, "U");
}

SignalMatrix generate_factor_signal(Index n, Index p, Index r, std::uint64_t seed) {
  if (n < 1 || p < 1 || r < 1 || r > std::min(n, p)) {
    throw DimensionError("generate_factor_signal: need 1 <= r <= min(n, p)");
  }
  Rng rng(seed, kSignalStream);
  Matrix u(n, r);
  Matrix v(p, r);
  for (Index i = 0; i < n; ++i)
    for (Index s = 0; s < r; ++s) u(i, s) = rng.normal();
  for (Index j = 0; j < p; ++j)
    for (Index s = 0; s < r; ++s) v(j, s) = rng.normal();
  return SignalMatrix{u * v.transpose(), r};
}

Matrix draw_noise(const Matrix& x, const CorruptionSpec& spec, std::uint64_t stream) {
  spec.validate(x.cols());
  const Index noisy = spec.noisy_columns.value_or(x.cols());
  Matrix h = Matrix::Zero(x.rows(), x.cols());
  if (spec.noise == NoiseKind::none) return h;
  Rng rng(spec.seed, stream);
  const double laplace_scale = spec.sigma_h / std::sqrt(2.0);
  // Row-major draw order so the stream layout does not depend on storage order.
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < noisy; ++j) {
      switch (spec.noise) {
        case NoiseKind::gaussian: h(i, j) = spec.sigma_h * rng.normal(); break;
        case NoiseKind::laplace: h(i, j) = rng.laplace(laplace_scale); break;
        case NoiseKind::discretize_poisson: {
          const double xij = x(i, j);
          const double zij = sign(xij) * static_cast<double>(rng.poisson(std::abs(xij)));
          h(i, j) = zij - xij;
          break;
        }
        case NoiseKind::none: break;
      }
    }
  }
  return h;
}

// Independent MCAR by default. With correlated_missing, each row draws a
// shared factor f ~ Bernoulli(0.5); entry (i, j) is observed with probability
// min(1, 2 rho_j) when f = 0 and max(0, 2 rho_j - 1) when f = 1. The marginal
// observation rate stays rho_j while entries within a row become dependent.
// This is one admissible dependent generator, not a canonical one.
BoolMatrix draw_mask(Index n, Index p, const CorruptionSpec& spec) {
  spec.validate(p);
  BoolMatrix mask = BoolMatrix::Constant(n, p, true);
  bool any_missing = false;
  for (Index j = 0; j < p; ++j) any_missing = any_missing || spec.rho_for(j) < 1.0;
  if (!any_missing) return mask;
  Rng rng(spec.seed, kMaskStream);
  for (Index i = 0; i < n; ++i) {
    const bool factor = spec.correlated_missing ? rng.bernoulli(0.5) : false;
    for (Index j = 0; j < p; ++j) {
      const double rho = spec.rho_for(j);
      double prob = rho;
      if (spec.correlated_missing) {
        prob = factor ? std::max(0.0, 2.0 * rho - 1.0) : std::min(1.0, 2.0 * rho);
      }
      mask(i, j) = rng.bernoulli(prob);
    }
  }
  return mask;
}

CorruptedDataset corrupt(const SignalMatrix& x, const CorruptionSpec& spec) {
  spec.validate(x.values.cols());
  Matrix z = x.values + draw_noise(x.values, spec, kNoiseStream);
  BoolMatrix mask = draw_mask(x.values.rows(), x.values.cols(), spec);
  CorruptedDataset out;
  out.z = MaskedMatrix(std::move(z), std::move(mask));
  return out;
}

Matrix conditional_mean_check(const SignalMatrix& x, const CorruptionSpec& spec, Index reps) {
  if (reps < 1) throw ConfigurationError("conditional_mean_check: reps must be >= 1");
  Matrix sum = Matrix::Zero(x.values.rows(), x.values.cols());
  for (Index t = 0; t < reps; ++t) {
    sum += draw_noise(x.values, spec, kCheckStreamBase + static_cast<std::uint64_t>(t));
  }
  return sum / static_cast<double>(reps);
}

double truncated_logistic(double t) {
  return (0.95 - 0.05) * (1.0 / (1.0 + std::exp(-t))) + 0.05;
}

SimulatedDraw simulate_dgp_full(Index n, Index p, Index r, const CorruptionSpec& spec,
                                std::uint64_t seed) {
  if (n < 2 || p < 2) throw DimensionError("simulate_dgp: need n, p >= 2");
  SignalMatrix signal = generate_factor_signal(n, p, r, seed);
  const Matrix& x = signal.values;

  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta(j) = 1.0 / static_cast<double>((j + 1) * (j + 1));
  const Vector index = x * beta;

  Rng rng(seed, kOutcomeStream);
  Vector d(n), y(n), propensity(n);
  for (Index i = 0; i < n; ++i) {
    propensity(i) = truncated_logistic(0.25 * index(i));
    d(i) = rng.bernoulli(propensity(i)) ? 1.0 : 0.0;
    const double eps = rng.normal();
    y(i) = kSimulatedTheta * d(i) + 1.2 * index(i) + d(i) * x(i, 0) + eps;
  }

  CorruptedDataset data = corrupt(signal, spec);
  data.y = std::move(y);
  data.d = std::move(d);
  data.theta_true = kSimulatedTheta;
  return SimulatedDraw{std::move(data), std::move(signal), std::move(propensity)};
}

CorruptedDataset simulate_dgp(Index n, Index p, Index r, const CorruptionSpec& spec,
                              std::uint64_t seed) {
  return simulate_dgp_full(n, p, r, spec, seed).data;
}

double sigma_for_ratio(double ratio, double signal_variance) {
  if (!(ratio >= 0.0) || !(signal_variance > 0.0)) {
    throw ConfigurationError("noise-to-signal ratio must be >= 0 and signal variance > 0");
  }
  return std::sqrt(ratio * signal_variance);
}

}  // namespace dcci
