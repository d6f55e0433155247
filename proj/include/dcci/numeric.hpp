#pragma once

#include "dcci/types.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace dcci {

// Pairwise (cascade) summation in index order. The result depends only on
// the input sequence, never on how work was scheduled.
double pairwise_sum(std::span<const double> values);
double pairwise_mean(std::span<const double> values);
inline double pairwise_mean(const Vector& v) {
  return pairwise_mean(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

// Population variance (divisor n) around the pairwise mean.
double population_variance(std::span<const double> values);

// Column means of a matrix with pairwise summation down each column.
RowVector column_means(const Matrix& m);

// Numerical rank at relative tolerance rel_tol * top singular value.
Index numerical_rank(const Vector& singular_values, double rel_tol = 1e-8);

// Runs body(i) for i in [0, count) on up to `threads` worker threads.
// Each index is executed exactly once; exceptions are rethrown (lowest index
// first) after all workers finish.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace dcci
