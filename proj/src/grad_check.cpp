#include "autofield/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace autofield {

GradCheckReport finite_diff_span(const std::function<double()>& loss, std::span<double> values,
                                 std::span<const double> analytic, std::size_t coords,
                                 Rng::Engine& pick, double h, std::string_view name,
                                 GradCheckReport carry) {
  GradCheckReport report = carry;
  if (values.empty()) return report;
  coords = std::min(coords, values.size());

  for (std::size_t c = 0; c < coords; ++c) {
    // Sample distinct-ish coordinates; repeats are harmless, just redundant.
    const std::size_t idx = coords == values.size()
                                ? c
                                : static_cast<std::size_t>(uniform_below(pick, values.size()));
    const double saved = values[idx];
    const double step = h * std::max(1.0, std::abs(saved));

    values[idx] = saved + step;
    const double plus = loss();
    values[idx] = saved - step;
    const double minus = loss();
    values[idx] = saved;

    const double numeric = (plus - minus) / (2.0 * step);
    const double expected = analytic[idx];
    const double scale = std::max({std::abs(numeric), std::abs(expected), 1e-10});
    const double rel = std::abs(numeric - expected) / scale;

    ++report.coords_checked;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_parameter = std::string(name);
      report.worst_index = idx;
      report.worst_analytic = expected;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

GradCheckReport finite_diff_check(const std::function<double()>& loss, ParameterStore& params,
                                  std::size_t coords_per_tensor, Rng::Engine& pick, double h) {
  GradCheckReport report;
  for (auto& tensor : params) {
    report = finite_diff_span(loss, {tensor.value.data(), tensor.value.size()},
                              {tensor.grad.data(), tensor.grad.size()}, coords_per_tensor, pick,
                              h, tensor.name, report);
  }
  return report;
}

}  // namespace autofield
