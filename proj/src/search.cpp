#include "autofield/search.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "autofield/error.hpp"
#include "autofield/ops.hpp"

namespace autofield {
namespace {

std::size_t checked_batch_size(std::size_t batch_size) {
  if (batch_size < 1) throw ConfigError("search: batch_size must be >= 1");
  return batch_size;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* search_mode_name(SearchMode mode) {
  switch (mode) {
    case SearchMode::autofield: return "autofield";
    case SearchMode::al1: return "al1";
    case SearchMode::al2: return "al2";
    case SearchMode::al3: return "al3";
  }
  return "?";
}

SearchMode parse_search_mode(const std::string& name) {
  if (name == "autofield") return SearchMode::autofield;
  if (name == "al1") return SearchMode::al1;
  if (name == "al2") return SearchMode::al2;
  if (name == "al3") return SearchMode::al3;
  throw ConfigError("unknown search mode '" + name + "' (autofield|al1|al2|al3)");
}

GateMode gate_mode_for(SearchMode mode) {
  return (mode == SearchMode::al2 || mode == SearchMode::al3) ? GateMode::plain_softmax
                                                              : GateMode::gumbel;
}

bool selects_by_threshold(SearchMode mode) {
  return mode == SearchMode::al1 || mode == SearchMode::al3;
}

bool converged(std::span<const double> epoch_validation_losses, std::size_t patience,
               double min_delta) {
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (epoch_validation_losses.empty()) return false;
  double best = epoch_validation_losses[0];
  std::size_t stale = 0;
  for (std::size_t i = 1; i < epoch_validation_losses.size(); ++i) {
    if (epoch_validation_losses[i] < best - min_delta) {
      best = epoch_validation_losses[i];
      stale = 0;
    } else if (++stale >= patience) {
      return true;
    }
  }
  return false;
}

SearchEngine::SearchEngine(const SearchConfig& config, const EncodedDataset& data,
                           const DatasetSplits& splits)
    : config_(config),
      data_(&data),
      controller_(data.n_fields(), gate_mode_for(config.mode)),
      weight_optimizer_(config.weight_optimizer),
      controller_optimizer_(config.controller_optimizer),
      train_batches_(data, splits.train, checked_batch_size(config.batch_size), true,
                     Rng::mix(config.seed, "batch.train"), SplitTag::train),
      validation_batches_(BatchIterator(data, splits.validation, config.batch_size, true,
                                        Rng::mix(config.seed, "batch.validation"),
                                        SplitTag::validation)),
      validation_eval_(data, splits.validation, config.batch_size, false, 0,
                       SplitTag::validation),
      gumbel_engine_(Rng(config.seed).stream("search.gumbel")),
      dropout_engine_(Rng(config.seed).stream("search.dropout")) {
  if (splits.train.empty()) throw ContractViolation("search: training split is empty");
  if (config_.update_frequency < 1) throw ConfigError("search: update frequency must be >= 1");
  if (config_.patience < 1) throw ConfigError("search: patience must be >= 1");
  if (config_.max_epochs < 1) throw ConfigError("search: max_epochs must be >= 1");
  if (!selects_by_threshold(config_.mode) &&
      (config_.k < 1 || config_.k > data.n_fields())) {
    throw ConfigError("search: K must lie in [1, " + std::to_string(data.n_fields()) + "]");
  }

  ModelConfig model_config = config_.model;
  model_config.n_fields = data.n_fields();
  if (model_config.active_fields.empty()) {
    model_config.active_fields.resize(data.n_fields());
    std::iota(model_config.active_fields.begin(), model_config.active_fields.end(),
              std::size_t{0});
  }
  config_.model = model_config;
  model_ = std::make_unique<RecModel>(model_config, data.cardinalities(), Rng(config_.seed));
}

double SearchEngine::current_tau() const {
  const std::size_t t = config_.anneal_on_weight_steps ? weight_updates_ : controller_updates_;
  return config_.temperature.at(t);
}

GateSample SearchEngine::next_gates() {
  return controller_.sample_gates(current_tau(), gumbel_engine_);
}

double SearchEngine::weight_step(const Batch& batch, const GateSample& gates) {
  if (batch.tag != SplitTag::train) {
    throw ContractViolation("weight_step requires a training batch");
  }
  ForwardRecord record = model_->forward(batch, gates.keep_prob, true, &dropout_engine_);
  BceResult bce = bce_loss(record.predictions, batch.labels);
  if (!std::isfinite(bce.loss)) throw NumericError("weight_step: non-finite training loss");
  model_->params().zero_grads();
  model_->backward(record, bce.dpredictions);
  weight_optimizer_.step(model_->params());
  ++weight_updates_;
  return bce.loss;
}

double SearchEngine::controller_step(const Batch& batch, const GateSample& gates) {
  if (batch.tag != SplitTag::validation) {
    throw ContractViolation("controller_step requires a validation batch");
  }
  // Evaluation-mode forward: the controller objective is a validation loss,
  // so no dropout noise. Gradients flow through the gates only.
  ForwardRecord record = model_->forward(batch, gates.keep_prob, false, nullptr);
  BceResult bce = bce_loss(record.predictions, batch.labels);
  if (!std::isfinite(bce.loss)) throw NumericError("controller_step: non-finite validation loss");
  model_->params().zero_grads();
  const std::vector<double> dgates = model_->backward(record, bce.dpredictions);
  model_->params().zero_grads();  // weight gradients from this pass are discarded
  controller_.params().zero_grads();
  controller_.accumulate_gate_gradients(gates, dgates);
  controller_optimizer_.step(controller_.params());
  ++controller_updates_;
  return bce.loss;
}

double SearchEngine::evaluate_validation_loss() {
  const GateSample gates = controller_.expectation_gates();
  validation_eval_.start_epoch(0);
  double weighted_sum = 0.0;
  std::size_t rows = 0;
  while (auto batch = validation_eval_.next()) {
    const std::vector<double> predictions = model_->predict(*batch, gates.keep_prob);
    weighted_sum += bce_mean(predictions, batch->labels) * static_cast<double>(batch->size);
    rows += batch->size;
  }
  if (rows == 0) throw ContractViolation("search: validation split is empty");
  return weighted_sum / static_cast<double>(rows);
}

SearchResult SearchEngine::run(TraceSink* sink) {
  SearchResult result;
  SearchTrace& trace = result.trace;
  std::vector<double> epoch_losses;
  const auto run_start = std::chrono::steady_clock::now();

  try {
    for (std::size_t epoch = 0; epoch < config_.max_epochs; ++epoch) {
      const auto epoch_start = std::chrono::steady_clock::now();
      train_batches_.start_epoch(epoch);
      double loss_sum = 0.0;
      std::size_t batches = 0;

      while (auto batch = train_batches_.next()) {
        GateSample gates = next_gates();
        StepRecord step;
        step.tau = gates.tau;
        step.train_loss = weight_step(*batch, gates);
        step.step = weight_updates_;
        step.gate = gates.keep_prob;
        loss_sum += step.train_loss;
        ++batches;

        if (weight_updates_ % config_.update_frequency == 0) {
          Batch validation_batch = validation_batches_.next();
          GateSample validation_gates = next_gates();
          step.validation_loss = controller_step(validation_batch, validation_gates);
          step.alpha = controller_.keep_probability();
        }
        if (sink) sink->on_step(step);
        trace.steps.push_back(std::move(step));
      }

      EpochRecord record;
      record.epoch = epoch;
      record.mean_train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
      record.validation_loss = evaluate_validation_loss();
      record.seconds = seconds_since(epoch_start);
      if (sink) sink->on_epoch(record);
      trace.epochs.push_back(record);
      epoch_losses.push_back(record.validation_loss);
      if (converged(epoch_losses, config_.patience, config_.min_delta)) break;
    }
  } catch (const NumericError&) {
    if (sink) sink->flush();
    throw;
  }

  trace.weight_updates = weight_updates_;
  trace.controller_updates = controller_updates_;
  trace.total_seconds = seconds_since(run_start);
  result.alpha = controller_.keep_probability();
  if (selects_by_threshold(config_.mode)) {
    result.selected = controller_.select_by_threshold();
    result.empty_selection = result.selected.empty();
  } else {
    result.selected = controller_.select_top_k(config_.k);
  }
  if (sink) sink->flush();
  return result;
}

}  // namespace autofield
