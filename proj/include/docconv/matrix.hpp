#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace docconv {

/// Dense double-precision matrix stored row-major.
///
/// Rows index feature or embedding dimensions (channels); columns index
/// positions along the text axis (words in a sentence, sentences in a
/// document). Zero-column matrices are legal and show up for empty inputs.
class Matrix {
 public:
  Matrix() : Matrix(1, 0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  void fill(double value);
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

// "RxC", for error messages.
std::string shape_string(const Matrix& m);

}  // namespace docconv
