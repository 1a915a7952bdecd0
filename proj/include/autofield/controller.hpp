#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autofield/params.hpp"
#include "autofield/rng.hpp"

namespace autofield {

// How gate values are produced during search: noisy temperature-annealed
// relaxation (default) or the noiseless expectation (ablation AL-2).
enum class GateMode { gumbel, plain_softmax };

const char* gate_mode_name(GateMode mode);

// tau(t) = max(floor, 1 - slope * t), non-increasing in t.
struct TemperatureSchedule {
  double floor = 0.01;
  double slope = 0.00005;

  double at(std::size_t t) const {
    const double tau = 1.0 - slope * static_cast<double>(t);
    return tau < floor ? floor : tau;
  }
};

// Standard Gumbel draws g = -log(-log(u)), u clamped away from {0,1}.
std::vector<double> sample_gumbel(Rng::Engine& engine, std::size_t count);

// One gate realization for every field. keep_prob is the multiplier applied
// to the field's embedding block; keep_prob + drop_prob = 1 per field.
struct GateSample {
  GateMode mode = GateMode::gumbel;
  double tau = 1.0;
  std::vector<double> gumbel_keep;  // noise on the keep logit (empty in plain mode)
  std::vector<double> gumbel_drop;  // noise on the drop logit
  std::vector<double> keep_prob;
  std::vector<double> drop_prob;
};

// Per-field keep/drop preference as a 2-logit softmax pair. The probability
// pair (keep, drop) always sums to 1 by construction; fresh controllers start
// at 0.5/0.5 (all logits zero).
class Controller {
 public:
  explicit Controller(std::size_t n_fields, GateMode mode = GateMode::gumbel);

  std::size_t n_fields() const { return n_fields_; }
  GateMode mode() const { return mode_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Keep probability per field: softmax of the (keep, drop) logit pair.
  std::vector<double> keep_probability() const;

  // Gumbel-Softmax relaxation at temperature tau; fresh noise pair per field.
  // Throws ContractViolation unless tau > 0. In plain mode this ignores the
  // noise and temperature and returns expectation gates.
  GateSample sample_gates(double tau, Rng::Engine& engine) const;

  // Noiseless gates equal to the keep probabilities.
  GateSample expectation_gates() const;

  // Chain rule from dloss/dgate into the logit gradient buffers (adds).
  void accumulate_gate_gradients(const GateSample& sample, std::span<const double> dgates);

  // Indices of the K largest keep probabilities; ties break toward the lower
  // field index; result sorted ascending. Throws ConfigError on K out of [1, N].
  std::vector<std::size_t> select_top_k(std::size_t k) const;

  // All fields with keep probability strictly above 0.5; may be empty.
  std::vector<std::size_t> select_by_threshold() const;

 private:
  std::size_t n_fields_;
  GateMode mode_;
  ParameterStore params_;
  std::size_t logits_;  // handle of the N x 2 logit tensor (col 0 keep, col 1 drop)
};

}  // namespace autofield
