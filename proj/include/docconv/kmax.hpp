#pragma once

#include <cstddef>
#include <vector>

#include "docconv/matrix.hpp"

namespace docconv {

enum class PoolMode { fixed, dynamic };

/// k-max pooling configuration. In dynamic mode k grows with the sequence
/// length: k = max(k_top, ceil(fraction * length)).
struct PoolSpec {
  PoolMode mode = PoolMode::fixed;
  std::size_t k_top = 1;
  double fraction = 1.0;

  static PoolSpec fixed(std::size_t k) { return {PoolMode::fixed, k, 1.0}; }
  static PoolSpec dynamic(std::size_t k_top, double fraction) {
    return {PoolMode::dynamic, k_top, fraction};
  }

  void validate() const;

  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

std::size_t resolve_k(const PoolSpec& spec, std::size_t length);

/// Per-row column indices kept by a k-max pooling pass, each list strictly
/// increasing and of length min(k, input_cols).
struct PoolSelection {
  std::size_t input_cols = 0;
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> indices;
};

struct PoolResult {
  Matrix output;
  PoolSelection selection;
};

/// Keeps the k largest values of every row in their original order; rows
/// shorter than k are right-padded with zeros. Ties go to the lower column.
PoolResult kmax_forward(const Matrix& input, std::size_t k);

/// Resolves k from `spec` and `sequence_length`, then pools.
PoolResult kmax_forward(const Matrix& input, const PoolSpec& spec, std::size_t sequence_length);

/// Routes each pooled gradient back to the column it was taken from. Padding
/// slots have no source and their gradient is dropped.
Matrix kmax_backward(const Matrix& grad_out, const PoolSelection& selection);

}  // namespace docconv
