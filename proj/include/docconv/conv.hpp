#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "docconv/matrix.hpp"

namespace docconv {

/// Weights of one convolution layer: `maps` filters, each spanning every
/// input channel (`depth`) over `width` adjacent positions, plus one bias per
/// filter. Each filter produces exactly one output row.
class FilterBank {
 public:
  FilterBank(std::size_t depth, std::size_t width, std::size_t maps);

  std::size_t depth() const noexcept { return depth_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t maps() const noexcept { return maps_; }

  // Layout is [channel][tap][map], map fastest.
  double& weight(std::size_t channel, std::size_t tap, std::size_t map) {
    return weights_[(channel * width_ + tap) * maps_ + map];
  }
  double weight(std::size_t channel, std::size_t tap, std::size_t map) const {
    return weights_[(channel * width_ + tap) * maps_ + map];
  }

  std::span<double> weights() noexcept { return weights_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> bias() noexcept { return bias_; }
  std::span<const double> bias() const noexcept { return bias_; }

  friend bool operator==(const FilterBank&, const FilterBank&) = default;

 private:
  std::size_t depth_;
  std::size_t width_;
  std::size_t maps_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

/// Wide ("full") one-dimensional convolution along the column axis.
///
///   out[m, t] = bias[m] + sum_c sum_j W[c, j, m] * in[c, t + j - (width - 1)]
///
/// for t = 0 .. n + width - 2, with the input zero outside columns 0..n-1.
/// Output shape is maps x (n + width - 1).
Matrix wide_conv_forward(const Matrix& input, const FilterBank& bank);

struct ConvGradient {
  Matrix input;
  FilterBank bank;  // same shape as the forward bank; holds dW and db
};

/// Exact gradients of sum(grad_out .* wide_conv_forward(input, bank)).
ConvGradient wide_conv_backward(const Matrix& grad_out, const Matrix& input,
                                const FilterBank& bank);

}  // namespace docconv
