#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace docconv {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;   // at worst_index
};

/// Compares `analytic` against central differences of `loss`, perturbing
/// `params` in place one coordinate at a time (each is restored afterwards).
///
/// Relative error per coordinate is
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
/// and the maximum over coordinates is reported. Throws NumericError naming
/// the coordinate if `loss` returns a non-finite value.
GradCheckResult grad_check(const std::function<double()>& loss, std::span<double> params,
                           std::span<const double> analytic, double eps = 1e-5);

}  // namespace docconv
