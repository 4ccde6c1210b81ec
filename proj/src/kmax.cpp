#include "docconv/kmax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "docconv/errors.hpp"

namespace docconv {

void PoolSpec::validate() const {
  if (k_top == 0) throw ConfigError("k-max pooling needs k >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("dynamic pooling fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
}

std::size_t resolve_k(const PoolSpec& spec, std::size_t length) {
  if (spec.mode == PoolMode::fixed) return spec.k_top;
  // The small slack keeps products like 0.3 * 10 from rounding up to 4.
  const double scaled = spec.fraction * static_cast<double>(length);
  const auto k = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
  return std::max(spec.k_top, k);
}

PoolResult kmax_forward(const Matrix& input, std::size_t k) {
  if (k == 0) throw ConfigError("k-max pooling needs k >= 1");
  const std::size_t n = input.cols();
  const std::size_t keep = std::min(k, n);

  PoolResult result{Matrix(input.rows(), k), PoolSelection{n, k, {}}};
  result.selection.indices.resize(input.rows());

  std::vector<std::size_t> order(n);
  for (std::size_t r = 0; r < input.rows(); ++r) {
    const auto row = input.row(r);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    auto& chosen = result.selection.indices[r];
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t p = 0; p < keep; ++p) result.output(r, p) = row[chosen[p]];
  }
  return result;
}

PoolResult kmax_forward(const Matrix& input, const PoolSpec& spec, std::size_t sequence_length) {
  return kmax_forward(input, resolve_k(spec, sequence_length));
}

Matrix kmax_backward(const Matrix& grad_out, const PoolSelection& selection) {
  if (grad_out.rows() != selection.indices.size() || grad_out.cols() != selection.k) {
    throw ConfigError("pooled gradient " + shape_string(grad_out) + " does not match selection " +
                      std::to_string(selection.indices.size()) + "x" + std::to_string(selection.k));
  }
  Matrix grad_in(grad_out.rows(), selection.input_cols);
  for (std::size_t r = 0; r < grad_out.rows(); ++r) {
    const auto& chosen = selection.indices[r];
    for (std::size_t p = 0; p < chosen.size(); ++p) grad_in(r, chosen[p]) += grad_out(r, p);
  }
  return grad_in;
}

}  // namespace docconv
