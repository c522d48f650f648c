#ifndef CBO_MATRIX_HPP
#define CBO_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace cbo {

// Dense row-major matrix of doubles. Rows are particle positions throughout.
struct Matrix {
  long rows = 0;
  long cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(long r, long c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(long i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(long i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  std::span<double> row_span(long i) { return {row(i), static_cast<std::size_t>(cols)}; }
  std::span<const double> row_span(long i) const { return {row(i), static_cast<std::size_t>(cols)}; }

  double& at(long i, long j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(long i, long j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

}  // namespace cbo

#endif
