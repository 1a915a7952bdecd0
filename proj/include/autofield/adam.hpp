#pragma once

#include <cstddef>
#include <vector>

#include "autofield/params.hpp"

namespace autofield {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer with bias correction, bound to one
// ParameterStore. Moment buffers are zero-initialized on first step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update to every tensor in the store from its grad buffer.
  // Throws NumericError naming the tensor on a non-finite gradient, and
  // verifies parameters stay finite after the update.
  void step(ParameterStore& store);

  std::size_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

  // Checkpoint access. State layout: one m/v pair per tensor, in store order.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void restore(std::size_t step_count, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  void ensure_state(const ParameterStore& store);

  AdamConfig config_;
  std::size_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace autofield
