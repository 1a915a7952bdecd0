#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "autofield/adam.hpp"
#include "autofield/data.hpp"
#include "autofield/model.hpp"

namespace autofield {

struct RetrainConfig {
  std::size_t max_epochs = 30;
  std::size_t patience = 3;
  double min_delta = 1e-5;
  std::size_t batch_size = 2048;
  std::uint64_t seed = 0;
  // When set, trains exactly this many epochs with no early stop; used for
  // budget-controlled runs and like-for-like timing comparisons.
  std::optional<std::size_t> fixed_epochs;
  ModelConfig model;  // active_fields is replaced by the selection
  AdamConfig optimizer;
};

struct EvalResult {
  double auc = 0.0;
  double logloss = 0.0;
  double ms_per_batch = 0.0;  // mean forward time per batch
};

struct RetrainEpoch {
  std::size_t epoch = 0;
  double mean_train_loss = 0.0;
  double validation_logloss = 0.0;
  double validation_auc = 0.0;  // NaN when the split is single-class
  double seconds = 0.0;
};

struct RetrainReport {
  std::vector<std::size_t> selected;
  double test_auc = 0.0;
  double test_logloss = 0.0;
  std::size_t epochs = 0;
  double train_seconds = 0.0;
  double infer_ms_per_batch = 0.0;
  std::vector<RetrainEpoch> epoch_log;
};

struct RetrainOutcome {
  RetrainReport report;
  std::unique_ptr<RecModel> model;
};

// Deterministic single pass in evaluation mode (no dropout, no gates).
// Throws ConfigError when the model's schema width does not match the data
// and MetricError when `rows` carries a single label class.
EvalResult evaluate_model(const RecModel& model, const EncodedDataset& data,
                          std::span<const std::uint32_t> rows, std::size_t batch_size);

// Hard-selection retraining: builds a fresh model over exactly the selected
// fields (dropped fields never enter the compute graph), trains with
// validation-logloss early stopping, then evaluates once on test.
RetrainOutcome run_retrain(const RetrainConfig& config, std::vector<std::size_t> selected,
                           const EncodedDataset& data, const DatasetSplits& splits);

}  // namespace autofield
