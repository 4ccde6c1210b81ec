#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "docconv/matrix.hpp"

namespace docconv {

Matrix tanh_forward(const Matrix& input);

// grad_in = grad_out * (1 - out^2), where `output` is what tanh_forward returned.
Matrix tanh_backward(const Matrix& grad_out, const Matrix& output);

std::vector<double> softmax(std::span<const double> logits);

struct SoftmaxLoss {
  std::vector<double> probabilities;
  double loss = 0.0;                // -log p[label]
  std::vector<double> grad_logits;  // p - onehot(label)
};

SoftmaxLoss softmax_xent(std::span<const double> logits, std::size_t label);

}  // namespace docconv
