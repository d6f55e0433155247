#include "dcci/privacy.hpp"

#include "dcci/error.hpp"
#include "dcci/rng.hpp"

#include <cmath>
#include <string>

namespace dcci {

namespace {

constexpr std::uint64_t kPrivacyStream = 0x40;

}  // namespace

void CentralDpSpec::validate() const {
  if (!(epsilon > 0.0)) throw ConfigurationError("epsilon must be positive");
  if (p < 1) throw ConfigurationError("p must be at least 1");
  if (a_bar.size() == 0 || a_bar.size() != units.size()) {
    throw ConfigurationError("A_bar and L must be nonempty with one entry per unit");
  }
  if ((a_bar.array() <= 0.0).any()) throw ConfigurationError("every A_bar must be positive");
  if ((units.array() < 1.0).any()) throw ConfigurationError("every L must be at least 1");
}

void MicroDpSpec::validate() const {
  if (!(epsilon > 0.0)) throw ConfigurationError("epsilon must be positive");
  if (t < 1) throw ConfigurationError("T must be at least 1");
  if (!(a_bar > 0.0)) throw ConfigurationError("A_bar must be positive");
}

Vector central_scale(const CentralDpSpec& spec) {
  spec.validate();
  Vector out(spec.a_bar.size());
  const auto p = static_cast<double>(spec.p);
  for (Index i = 0; i < out.size(); ++i) {
    out(i) = 2.0 * spec.a_bar(i) * p / (spec.epsilon * spec.units(i));
  }
  return out;
}

SubExponentialBound central_subexp_bound(const CentralDpSpec& spec) {
  spec.validate();
  const auto p = static_cast<double>(spec.p);
  double worst = 0.0;
  for (Index i = 0; i < spec.a_bar.size(); ++i) {
    worst = std::max(worst, std::pow(2.0, 1.5) * spec.a_bar(i) / spec.epsilon * p / spec.units(i));
  }
  return {worst, worst};
}

double micro_scale(const MicroDpSpec& spec) {
  spec.validate();
  return 2.0 * spec.a_bar * static_cast<double>(spec.t) / spec.epsilon;
}

SubExponentialBound micro_subexp_bound(const MicroDpSpec& spec) {
  spec.validate();
  const double bound = std::pow(2.0, 1.5) * spec.a_bar * static_cast<double>(spec.t) / spec.epsilon;
  return {bound, bound};
}

PoverLReport p_over_l_diagnostic(const CentralDpSpec& spec, Index n, Index p) {
  spec.validate();
  if (n < 1 || p < 1) throw ConfigurationError("n and p must be positive");
  PoverLReport report;
  for (Index i = 0; i < spec.units.size(); ++i) {
    report.max_p_over_l = std::max(report.max_p_over_l, static_cast<double>(p) / spec.units(i));
  }
  report.log_np = std::log(static_cast<double>(n) * static_cast<double>(p));
  report.passes = report.max_p_over_l < report.log_np;
  return report;
}

CorruptedDataset privatize(const Matrix& x, const std::variant<CentralDpSpec, MicroDpSpec>& spec,
                           std::uint64_t seed) {
  Rng rng(seed, kPrivacyStream);
  Matrix z = x;
  if (const auto* central = std::get_if<CentralDpSpec>(&spec)) {
    const Vector scale = central_scale(*central);
    if (scale.size() != x.rows() && scale.size() != 1) {
      throw DimensionError("central spec must list one unit per row (or a single unit)");
    }
    for (Index i = 0; i < x.rows(); ++i) {
      const double b = scale.size() == 1 ? scale(0) : scale(i);
      for (Index j = 0; j < x.cols(); ++j) z(i, j) += rng.laplace(b);
    }
  } else {
    const auto& micro = std::get<MicroDpSpec>(spec);
    const double b = micro_scale(micro);
    if (micro.t > x.cols()) throw DimensionError("T exceeds the number of columns");
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < micro.t; ++j) z(i, j) += rng.laplace(b);
    }
  }
  CorruptedDataset out;
  out.z = MaskedMatrix(std::move(z));
  return out;
}

}  // namespace dcci
