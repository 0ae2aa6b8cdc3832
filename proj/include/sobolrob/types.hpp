#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sobolrob {

// Dense row-major matrix of doubles; just enough for sample blocks and tables.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  bool operator==(const Mat&) const = default;
};

// One total (or normalized) Sobol' index per input variable.
using IndexVector = std::vector<double>;

}  // namespace sobolrob
