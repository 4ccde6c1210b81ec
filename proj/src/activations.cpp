#include "docconv/activations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "docconv/errors.hpp"

namespace docconv {

Matrix tanh_forward(const Matrix& input) {
  Matrix out(input.rows(), input.cols());
  auto src = input.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
  return out;
}

Matrix tanh_backward(const Matrix& grad_out, const Matrix& output) {
  if (grad_out.rows() != output.rows() || grad_out.cols() != output.cols()) {
    throw ConfigError("tanh gradient " + shape_string(grad_out) + " vs output " + shape_string(output));
  }
  Matrix grad_in(output.rows(), output.cols());
  auto g = grad_out.values();
  auto y = output.values();
  auto dst = grad_in.values();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] = g[i] * (1.0 - y[i] * y[i]);
  return grad_in;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ConfigError("softmax over zero classes");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

SoftmaxLoss softmax_xent(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw ConfigError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(logits.size()) + " classes");
  }
  SoftmaxLoss out;
  out.probabilities = softmax(logits);

  // log-sum-exp form keeps the loss exact when p[label] underflows.
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  out.loss = std::log(total) + top - logits[label];

  out.grad_logits = out.probabilities;
  out.grad_logits[label] -= 1.0;
  return out;
}

}  // namespace docconv
