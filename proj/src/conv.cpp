#include "docconv/conv.hpp"

#include <string>

#include "docconv/errors.hpp"

namespace docconv {

FilterBank::FilterBank(std::size_t depth, std::size_t width, std::size_t maps)
    : depth_(depth), width_(width), maps_(maps), weights_(depth * width * maps, 0.0), bias_(maps, 0.0) {
  if (depth == 0 || width == 0 || maps == 0) {
    throw ConfigError("filter bank dimensions must be positive, got depth=" + std::to_string(depth) +
                      " width=" + std::to_string(width) + " maps=" + std::to_string(maps));
  }
}

namespace {

std::string bank_shape(const FilterBank& bank) {
  return std::to_string(bank.depth()) + "x" + std::to_string(bank.width()) + "x" +
         std::to_string(bank.maps());
}

}  // namespace

Matrix wide_conv_forward(const Matrix& input, const FilterBank& bank) {
  if (input.rows() != bank.depth()) {
    throw ConfigError("convolution input " + shape_string(input) + " does not match filter bank " +
                      bank_shape(bank) + " (depth must equal input rows)");
  }
  const std::size_t n = input.cols();
  const std::size_t w = bank.width();
  const std::size_t maps = bank.maps();
  const std::size_t out_cols = n + w - 1;

  Matrix out(maps, out_cols);
  for (std::size_t m = 0; m < maps; ++m) {
    auto row = out.row(m);
    for (double& v : row) v = bank.bias()[m];
  }
  // Input column `col` meets tap j at output position col + (w - 1) - j.
  for (std::size_t c = 0; c < input.rows(); ++c) {
    for (std::size_t col = 0; col < n; ++col) {
      const double x = input(c, col);
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t t = col + (w - 1) - j;
        for (std::size_t m = 0; m < maps; ++m) out(m, t) += bank.weight(c, j, m) * x;
      }
    }
  }
  return out;
}

ConvGradient wide_conv_backward(const Matrix& grad_out, const Matrix& input,
                                const FilterBank& bank) {
  if (input.rows() != bank.depth()) {
    throw ConfigError("convolution input " + shape_string(input) + " does not match filter bank " +
                      bank_shape(bank));
  }
  const std::size_t n = input.cols();
  const std::size_t w = bank.width();
  const std::size_t maps = bank.maps();
  if (grad_out.rows() != maps || grad_out.cols() != n + w - 1) {
    throw ConfigError("convolution output gradient " + shape_string(grad_out) + " expected " +
                      std::to_string(maps) + "x" + std::to_string(n + w - 1));
  }

  ConvGradient grad{Matrix(input.rows(), n), FilterBank(bank.depth(), w, maps)};
  for (std::size_t m = 0; m < maps; ++m) {
    double sum = 0.0;
    for (double g : grad_out.row(m)) sum += g;
    grad.bank.bias()[m] = sum;
  }
  for (std::size_t c = 0; c < input.rows(); ++c) {
    for (std::size_t col = 0; col < n; ++col) {
      const double x = input(c, col);
      double gx = 0.0;
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t t = col + (w - 1) - j;
        for (std::size_t m = 0; m < maps; ++m) {
          const double g = grad_out(m, t);
          gx += bank.weight(c, j, m) * g;
          grad.bank.weight(c, j, m) += x * g;
        }
      }
      grad.input(c, col) = gx;
    }
  }
  return grad;
}

}  // namespace docconv
