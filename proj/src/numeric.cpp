#include "dcci/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace dcci {

namespace {

double cascade(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return cascade(data, half) + cascade(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return cascade(values.data(), values.size());
}

double pairwise_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean = pairwise_mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  return pairwise_mean(sq);
}

RowVector column_means(const Matrix& m) {
  RowVector out(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    // Column-major storage: the column is contiguous.
    out(j) = pairwise_mean(std::span<const double>(m.col(j).data(), static_cast<std::size_t>(m.rows())));
  }
  return out;
}

Index numerical_rank(const Vector& singular_values, double rel_tol) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  if (top <= 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > rel_tol * top) ++r;
  }
  return r;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace dcci
