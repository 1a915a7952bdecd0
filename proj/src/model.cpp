#include "autofield/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autofield/error.hpp"

namespace autofield {

void ModelConfig::validate() const {
  if (n_fields == 0) throw ConfigError("model: n_fields must be >= 1");
  if (embedding_dim == 0) throw ConfigError("model: embedding_dim must be >= 1");
  if (hidden.empty()) throw ConfigError("model: hidden sizes must be nonempty");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("model: hidden sizes must be >= 1");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("model: dropout_rate must lie in [0, 1)");
  }
  if (active_fields.empty()) throw ConfigError("model: active field set must be nonempty");
  std::vector<std::size_t> sorted = active_fields;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("model: duplicate active field");
  }
  if (sorted.back() >= n_fields) throw ConfigError("model: active field out of range");
}

ModelConfig adapt_architecture(const ModelConfig& base, std::vector<std::size_t> selected) {
  ModelConfig config = base;
  std::sort(selected.begin(), selected.end());
  config.active_fields = std::move(selected);
  config.validate();
  return config;
}

namespace {

Matrix init_dense(std::size_t rows, std::size_t cols, Rng::Engine& engine) {
  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); fan_in is the row count.
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.values()[i] = (2.0 * uniform01(engine) - 1.0) * bound;
  }
  return m;
}

Matrix init_embedding(std::size_t rows, std::size_t cols, Rng::Engine& engine) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.values()[i] = normal01(engine) * 0.01;
  }
  return m;
}

}  // namespace

RecModel::RecModel(ModelConfig config, std::vector<std::uint32_t> cardinalities, const Rng& rng)
    : config_(std::move(config)), cardinalities_(std::move(cardinalities)) {
  config_.validate();
  if (cardinalities_.size() != config_.n_fields) {
    throw ContractViolation("model: cardinalities must cover every schema field");
  }

  for (std::size_t field : config_.active_fields) {
    auto engine = rng.stream("init.embed." + std::to_string(field));
    embed_handles_.push_back(params_.add(
        "embed." + std::to_string(field),
        init_embedding(cardinalities_[field], config_.embedding_dim, engine)));
  }

  std::size_t width = config_.first_layer_width();
  for (std::size_t m = 0; m < config_.hidden.size(); ++m) {
    auto engine = rng.stream("init.dense." + std::to_string(m));
    weight_handles_.push_back(params_.add("dense." + std::to_string(m) + ".weight",
                                          init_dense(width, config_.hidden[m], engine)));
    weight_handles_.push_back(
        params_.add("dense." + std::to_string(m) + ".bias", Matrix(1, config_.hidden[m])));
    width = config_.hidden[m];
  }
  auto engine = rng.stream("init.output");
  weight_handles_.push_back(params_.add("output.weight", init_dense(width, 1, engine)));
  weight_handles_.push_back(params_.add("output.bias", Matrix(1, 1)));
}

ForwardRecord RecModel::forward(const Batch& batch, std::span<const double> gates,
                                bool training, Rng::Engine* dropout_engine,
                                const std::vector<Matrix>* frozen_masks) const {
  const std::size_t n_active = config_.active_fields.size();
  const std::size_t d = config_.embedding_dim;
  if (batch.n_fields != config_.n_fields) {
    throw ContractViolation("forward: batch field count does not match schema");
  }
  if (!gates.empty() && gates.size() != n_active) {
    throw ContractViolation("forward: gate vector length does not match active fields");
  }
  const bool dropout_on = training && config_.dropout_rate > 0.0;
  if (dropout_on && dropout_engine == nullptr && frozen_masks == nullptr) {
    throw ContractViolation("forward: training with dropout needs an engine or frozen masks");
  }
  if (frozen_masks && frozen_masks->size() != config_.hidden.size()) {
    throw ContractViolation("forward: frozen mask count does not match hidden layers");
  }

  ForwardRecord record;
  record.owner = this;
  record.training = training;
  record.batch_size = batch.size;
  record.gates.assign(gates.begin(), gates.end());
  if (record.gates.empty()) record.gates.assign(n_active, 1.0);

  // Gather: e_n is the row of field n's table picked by the hot coordinate,
  // identical to the dense one-hot product.
  record.active_indices.resize(batch.size * n_active);
  record.embedded = Matrix(batch.size, n_active * d);
  for (std::size_t b = 0; b < batch.size; ++b) {
    for (std::size_t k = 0; k < n_active; ++k) {
      const std::size_t field = config_.active_fields[k];
      const std::uint32_t index = batch.index(b, field);
      if (index >= cardinalities_[field]) {
        throw ContractViolation("forward: index out of vocabulary range for field " +
                                std::to_string(field));
      }
      record.active_indices[b * n_active + k] = index;
      const Matrix& table = params_[embed_handles_[k]].value;
      for (std::size_t j = 0; j < d; ++j) {
        record.embedded(b, k * d + j) = table(index, j);
      }
    }
  }

  record.gated = record.embedded;
  for (std::size_t b = 0; b < batch.size; ++b) {
    for (std::size_t k = 0; k < n_active; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        record.gated(b, k * d + j) *= record.gates[k];
      }
    }
  }

  const Matrix* layer_in = &record.gated;
  for (std::size_t m = 0; m < config_.hidden.size(); ++m) {
    const Matrix& weight = params_[weight_handles_[2 * m]].value;
    const Matrix& bias = params_[weight_handles_[2 * m + 1]].value;
    record.pre_activations.push_back(affine_forward(*layer_in, weight, bias));
    Matrix act = relu_forward(record.pre_activations.back());
    if (dropout_on) {
      Matrix mask;
      if (frozen_masks) {
        mask = (*frozen_masks)[m];
        if (!mask.same_shape(act)) {
          throw ContractViolation("forward: frozen mask shape mismatch at layer " +
                                  std::to_string(m));
        }
        for (std::size_t i = 0; i < act.size(); ++i) act.values()[i] *= mask.values()[i];
      } else {
        act = dropout_forward(act, config_.dropout_rate, true, *dropout_engine, mask);
      }
      record.dropout_masks.push_back(std::move(mask));
    }
    record.activations.push_back(std::move(act));
    layer_in = &record.activations.back();
  }

  const Matrix& out_weight = params_[weight_handles_[2 * config_.hidden.size()]].value;
  const Matrix& out_bias = params_[weight_handles_[2 * config_.hidden.size() + 1]].value;
  record.logits = affine_forward(*layer_in, out_weight, out_bias);
  record.predictions = sigmoid_forward(record.logits);
  return record;
}

std::vector<double> RecModel::backward(ForwardRecord& record, const Matrix& dpredictions) {
  if (record.owner != this) throw ContractViolation("backward: record from a different model");
  if (record.consumed) throw ContractViolation("backward: record already consumed");
  record.consumed = true;
  if (!dpredictions.same_shape(record.predictions)) {
    throw ContractViolation("backward: upstream gradient shape mismatch");
  }

  const std::size_t n_active = config_.active_fields.size();
  const std::size_t d = config_.embedding_dim;
  const std::size_t n_hidden = config_.hidden.size();

  // dlogit = dpred * sigma'(logit), with sigma' = p (1 - p).
  Matrix dlogits(record.logits.rows(), 1);
  for (std::size_t b = 0; b < dlogits.rows(); ++b) {
    const double p = record.predictions(b, 0);
    dlogits(b, 0) = dpredictions(b, 0) * p * (1.0 - p);
  }

  const Matrix& last_act =
      n_hidden > 0 ? record.activations.back() : record.gated;
  Tensor& out_weight = params_[weight_handles_[2 * n_hidden]];
  Tensor& out_bias = params_[weight_handles_[2 * n_hidden + 1]];
  Matrix upstream = affine_backward(last_act, out_weight.value, dlogits,
                                    out_weight.grad, out_bias.grad);

  for (std::size_t m = n_hidden; m-- > 0;) {
    if (!record.dropout_masks.empty()) {
      upstream = dropout_backward(record.dropout_masks[m], upstream);
    }
    upstream = relu_backward(record.pre_activations[m], upstream);
    const Matrix& layer_in = m == 0 ? record.gated : record.activations[m - 1];
    Tensor& weight = params_[weight_handles_[2 * m]];
    Tensor& bias = params_[weight_handles_[2 * m + 1]];
    upstream = affine_backward(layer_in, weight.value, upstream, weight.grad, bias.grad);
  }

  // upstream is now dloss/dgated. Gate gradient contracts it against the
  // pre-gate embedding; embedding gradient scales it by the gate and
  // scatters back through the gather.
  std::vector<double> dgates(n_active, 0.0);
  for (std::size_t b = 0; b < record.batch_size; ++b) {
    for (std::size_t k = 0; k < n_active; ++k) {
      Matrix& table_grad = params_[embed_handles_[k]].grad;
      const std::uint32_t index = record.active_indices[b * n_active + k];
      for (std::size_t j = 0; j < d; ++j) {
        const double up = upstream(b, k * d + j);
        dgates[k] += up * record.embedded(b, k * d + j);
        table_grad(index, j) += up * record.gates[k];
      }
    }
  }
  return dgates;
}

std::vector<double> RecModel::predict(const Batch& batch, std::span<const double> gates) const {
  ForwardRecord record = forward(batch, gates, false, nullptr);
  std::vector<double> out(record.predictions.values().begin(),
                          record.predictions.values().end());
  return out;
}

}  // namespace autofield
