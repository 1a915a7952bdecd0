#include "autofield/retrain.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "autofield/error.hpp"
#include "autofield/metrics.hpp"
#include "autofield/ops.hpp"
#include "autofield/search.hpp"

namespace autofield {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects evaluation-mode predictions over `rows`; returns the per-batch
// mean forward time in milliseconds through `ms_per_batch`.
ScoredSet score_rows(const RecModel& model, const EncodedDataset& data,
                     std::span<const std::uint32_t> rows, std::size_t batch_size,
                     double* ms_per_batch) {
  BatchIterator batches(data, {rows.begin(), rows.end()}, batch_size, false, 0,
                        SplitTag::test);
  ScoredSet set;
  set.scores.reserve(rows.size());
  set.labels.reserve(rows.size());
  std::size_t n_batches = 0;
  double forward_seconds = 0.0;
  while (auto batch = batches.next()) {
    const auto start = Clock::now();
    const std::vector<double> predictions = model.predict(*batch, {});
    forward_seconds += seconds_since(start);
    ++n_batches;
    set.scores.insert(set.scores.end(), predictions.begin(), predictions.end());
    set.labels.insert(set.labels.end(), batch->labels.begin(), batch->labels.end());
  }
  if (ms_per_batch) {
    *ms_per_batch = n_batches ? forward_seconds * 1000.0 / static_cast<double>(n_batches) : 0.0;
  }
  return set;
}

}  // namespace

EvalResult evaluate_model(const RecModel& model, const EncodedDataset& data,
                          std::span<const std::uint32_t> rows, std::size_t batch_size) {
  if (model.config().n_fields != data.n_fields()) {
    throw ConfigError("evaluate: model was built for " +
                      std::to_string(model.config().n_fields) + " fields, data has " +
                      std::to_string(data.n_fields()));
  }
  if (rows.empty()) throw ContractViolation("evaluate: empty row set");
  if (batch_size < 1) throw ConfigError("evaluate: batch_size must be >= 1");

  EvalResult result;
  const ScoredSet set = score_rows(model, data, rows, batch_size, &result.ms_per_batch);
  result.auc = auc(set);
  result.logloss = logloss(set);
  return result;
}

RetrainOutcome run_retrain(const RetrainConfig& config, std::vector<std::size_t> selected,
                           const EncodedDataset& data, const DatasetSplits& splits) {
  if (config.batch_size < 1) throw ConfigError("retrain: batch_size must be >= 1");
  if (config.patience < 1) throw ConfigError("retrain: patience must be >= 1");
  if (config.max_epochs < 1) throw ConfigError("retrain: max_epochs must be >= 1");
  if (config.fixed_epochs && *config.fixed_epochs < 1) {
    throw ConfigError("retrain: fixed_epochs must be >= 1");
  }
  if (splits.train.empty() || splits.validation.empty() || splits.test.empty()) {
    throw ConfigError("retrain: all three splits must be nonempty");
  }

  ModelConfig base = config.model;
  base.n_fields = data.n_fields();
  const ModelConfig adapted = adapt_architecture(base, std::move(selected));

  const Rng rng(config.seed);
  RetrainOutcome outcome;
  outcome.model = std::make_unique<RecModel>(adapted, data.cardinalities(), rng);
  RecModel& model = *outcome.model;
  RetrainReport& report = outcome.report;
  report.selected = adapted.active_fields;

  Adam optimizer(config.optimizer);
  BatchIterator train_batches(data, splits.train, config.batch_size, true,
                              Rng::mix(config.seed, "batch.retrain"), SplitTag::train);
  auto dropout_engine = rng.stream("retrain.dropout");

  const std::size_t epoch_cap = config.fixed_epochs ? *config.fixed_epochs : config.max_epochs;
  std::vector<double> validation_losses;
  const auto train_start = Clock::now();

  for (std::size_t epoch = 0; epoch < epoch_cap; ++epoch) {
    const auto epoch_start = Clock::now();
    train_batches.start_epoch(epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    while (auto batch = train_batches.next()) {
      ForwardRecord record = model.forward(*batch, {}, true, &dropout_engine);
      BceResult bce = bce_loss(record.predictions, batch->labels);
      if (!std::isfinite(bce.loss)) throw NumericError("retrain: non-finite training loss");
      model.params().zero_grads();
      model.backward(record, bce.dpredictions);
      optimizer.step(model.params());
      loss_sum += bce.loss;
      ++batches;
    }

    RetrainEpoch entry;
    entry.epoch = epoch;
    entry.mean_train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    const ScoredSet validation = score_rows(model, data, splits.validation,
                                            config.batch_size, nullptr);
    entry.validation_logloss = logloss(validation);
    try {
      entry.validation_auc = auc(validation);
    } catch (const MetricError&) {
      entry.validation_auc = std::numeric_limits<double>::quiet_NaN();
    }
    entry.seconds = seconds_since(epoch_start);
    report.epoch_log.push_back(entry);
    validation_losses.push_back(entry.validation_logloss);
    if (!config.fixed_epochs &&
        converged(validation_losses, config.patience, config.min_delta)) {
      break;
    }
  }
  report.train_seconds = seconds_since(train_start);
  report.epochs = report.epoch_log.size();

  const EvalResult test = evaluate_model(model, data, splits.test, config.batch_size);
  report.test_auc = test.auc;
  report.test_logloss = test.logloss;
  report.infer_ms_per_batch = test.ms_per_batch;
  return outcome;
}

}  // namespace autofield
