#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autofield/data.hpp"
#include "autofield/matrix.hpp"
#include "autofield/ops.hpp"
#include "autofield/params.hpp"
#include "autofield/rng.hpp"

namespace autofield {

struct ModelConfig {
  std::size_t n_fields = 0;                // N in the full schema
  std::size_t embedding_dim = 16;          // per-field embedding width
  std::vector<std::size_t> hidden{16, 8};  // fully-connected layer widths
  double dropout_rate = 0.2;
  std::vector<std::size_t> active_fields;  // ordered subset of [0, N)

  std::size_t first_layer_width() const { return active_fields.size() * embedding_dim; }
  void validate() const;
};

// New config whose active set is exactly `selected`; the caller constructs a
// fresh model from it, so no weights carry over and dropped fields have no
// embedding tables at all.
ModelConfig adapt_architecture(const ModelConfig& base, std::vector<std::size_t> selected);

// Everything backward() needs, captured by forward(). Single use: backward
// consumes the record.
struct ForwardRecord {
  const void* owner = nullptr;
  bool training = false;
  bool consumed = false;
  std::size_t batch_size = 0;
  std::vector<std::uint32_t> active_indices;  // B x n_active hot coordinates
  std::vector<double> gates;                  // per active field, as applied
  Matrix embedded;         // B x (n_active*d), pre-gate
  Matrix gated;            // B x (n_active*d), post-gate (MLP input)
  std::vector<Matrix> pre_activations;  // per hidden layer
  std::vector<Matrix> activations;      // post-ReLU, post-dropout
  std::vector<Matrix> dropout_masks;    // scale factors, empty in eval mode
  Matrix logits;       // B x 1
  Matrix predictions;  // B x 1, strictly inside (0,1)
};

// Embedding tables for the active fields plus a ReLU MLP with a logistic
// scalar output. The gate vector multiplies each field's embedding block
// before the first dense layer; that product is the controller's seam.
class RecModel {
 public:
  RecModel(ModelConfig config, std::vector<std::uint32_t> cardinalities, const Rng& rng);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  std::size_t first_layer_width() const { return config_.first_layer_width(); }

  // `gates`: one multiplier per active field; empty means all ones.
  // `dropout_engine` must be non-null when training with dropout_rate > 0.
  // `frozen_masks`, when given in training mode, replaces mask sampling
  // (used by gradient checks to pin the stochastic path).
  ForwardRecord forward(const Batch& batch, std::span<const double> gates, bool training,
                        Rng::Engine* dropout_engine,
                        const std::vector<Matrix>* frozen_masks = nullptr) const;

  // Accumulates parameter gradients from dloss/dpredictions (B x 1) and
  // returns dloss/dgate per active field.
  std::vector<double> backward(ForwardRecord& record, const Matrix& dpredictions);

  // Evaluation-mode scores.
  std::vector<double> predict(const Batch& batch, std::span<const double> gates) const;

 private:
  ModelConfig config_;
  std::vector<std::uint32_t> cardinalities_;  // full schema, indexed by field id
  ParameterStore params_;
  std::vector<std::size_t> embed_handles_;  // per active field
  std::vector<std::size_t> weight_handles_;  // dense layers, weight/bias interleaved
};

}  // namespace autofield
