#pragma once

#include <cstdint>
#include <random>

namespace dcci {

// SplitMix64 finalizer (Steele, Lea & Flood). Used to turn (seed, stream)
// pairs into well separated engine seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Reproducible random stream.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The engine is seeded with splitmix64(seed ^ splitmix64(stream)).
/// Distribution transforms are implemented here rather than taken from
/// <random>, because the standard leaves those implementation-defined; the
/// same (seed, stream) therefore yields the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  // Laplace(0, scale); variance 2 * scale^2.
  double laplace(double scale);
  std::int64_t poisson(double mean);
  bool bernoulli(double p);
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Per-replication seed: base ^ index (the documented derivation; Rng mixes it).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return base ^ index;
}

}  // namespace dcci
