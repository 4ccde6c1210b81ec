#include "docconv/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "docconv/errors.hpp"

namespace docconv {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0) throw ConfigError("matrix must have at least one row");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0) throw ConfigError("matrix must have at least one row");
  if (values_.size() != rows * cols) {
    throw ConfigError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " given " + std::to_string(values_.size()) + " values");
  }
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) {
    throw ConfigError("column of length " + std::to_string(values.size()) +
                      " does not fit matrix " + shape_string(*this));
  }
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

void Matrix::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace docconv
