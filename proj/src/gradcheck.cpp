#include "docconv/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "docconv/errors.hpp"

namespace docconv {

GradCheckResult grad_check(const std::function<double()>& loss, std::span<double> params,
                           std::span<const double> analytic, double eps) {
  if (params.size() != analytic.size()) {
    throw ConfigError("grad_check: " + std::to_string(params.size()) + " parameters but " +
                      std::to_string(analytic.size()) + " analytic gradients");
  }
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");

  auto evaluate = [&](std::size_t i, const char* side) {
    const double v = loss();
    if (!std::isfinite(v)) {
      throw NumericError("grad_check: non-finite loss at coordinate " + std::to_string(i) + " (" +
                         side + " perturbation)");
    }
    return v;
  };

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = evaluate(i, "+eps");
    params[i] = saved - eps;
    const double down = evaluate(i, "-eps");
    params[i] = saved;

    const double numeric = (up - down) / (2.0 * eps);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / scale;
    if (i == 0 || rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
      result.analytic = analytic[i];
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace docconv
