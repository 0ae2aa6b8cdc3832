#pragma once

#include <cstddef>
#include <span>

namespace sobolrob {

// Cascade (pairwise) summation with a reduction tree that depends only on the
// index range. All estimator reductions go through this so results do not
// depend on how callers chunk or thread the surrounding work.
template <class F>
double pairwise_sum_index(std::size_t lo, std::size_t hi, F&& term) {
  const std::size_t n = hi - lo;
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + n / 2;
  return pairwise_sum_index(lo, mid, term) + pairwise_sum_index(mid, hi, term);
}

inline double pairwise_sum(std::span<const double> v) {
  return pairwise_sum_index(0, v.size(), [&](std::size_t i) { return v[i]; });
}

}  // namespace sobolrob
