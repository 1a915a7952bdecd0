#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "autofield/params.hpp"
#include "autofield/rng.hpp"

namespace autofield {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central finite differences against an analytic gradient. `loss` must be a
// pure function of the checked values: freeze every stochastic input
// (dropout masks, gumbel draws, batch order) before calling. The step is
// scaled per coordinate as h * max(1, |value|).
GradCheckReport finite_diff_span(const std::function<double()>& loss, std::span<double> values,
                                 std::span<const double> analytic, std::size_t coords,
                                 Rng::Engine& pick, double h, std::string_view name,
                                 GradCheckReport carry = {});

// Checks `coords_per_tensor` random coordinates of every tensor in the
// store, comparing against the grad buffers already filled by a backward
// pass.
GradCheckReport finite_diff_check(const std::function<double()>& loss, ParameterStore& params,
                                  std::size_t coords_per_tensor, Rng::Engine& pick,
                                  double h = 1e-4);

}  // namespace autofield
