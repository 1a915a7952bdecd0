#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "autofield/adam.hpp"
#include "autofield/controller.hpp"
#include "autofield/data.hpp"
#include "autofield/model.hpp"

namespace autofield {

// Search variants: the full method plus the three ablations. AL-1 swaps
// top-K extraction for thresholding, AL-2 swaps noisy relaxed gates for the
// plain expectation gates, AL-3 applies both swaps.
enum class SearchMode { autofield, al1, al2, al3 };

const char* search_mode_name(SearchMode mode);
SearchMode parse_search_mode(const std::string& name);
GateMode gate_mode_for(SearchMode mode);
bool selects_by_threshold(SearchMode mode);

struct SearchConfig {
  SearchMode mode = SearchMode::autofield;
  std::size_t k = 0;                 // top-K size; ignored by threshold modes
  std::size_t update_frequency = 1;  // controller update every f weight steps
  std::size_t max_epochs = 30;
  std::size_t patience = 3;
  double min_delta = 1e-5;
  std::size_t batch_size = 2048;
  std::uint64_t seed = 0;
  TemperatureSchedule temperature;
  // Temperature step counter; defaults to controller updates.
  bool anneal_on_weight_steps = false;
  ModelConfig model;  // active_fields filled with all fields when left empty
  AdamConfig weight_optimizer;
  AdamConfig controller_optimizer;
};

struct StepRecord {
  std::size_t step = 0;  // weight updates so far (1-based)
  double tau = 1.0;
  double train_loss = 0.0;
  std::vector<double> gate;  // keep gates applied to this training batch
  // Present when this step also updated the controller:
  std::optional<double> validation_loss;
  std::vector<double> alpha;  // keep probabilities after the update
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_train_loss = 0.0;
  double validation_loss = 0.0;  // deterministic full-split evaluation
  double seconds = 0.0;
};

// Streaming observer for trace records; flush() must leave everything
// written so far durable (called before aborting on divergence).
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_step(const StepRecord&) {}
  virtual void on_epoch(const EpochRecord&) {}
  virtual void flush() {}
};

struct SearchTrace {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::size_t weight_updates = 0;
  std::size_t controller_updates = 0;
  double total_seconds = 0.0;
};

struct SearchResult {
  std::vector<std::size_t> selected;
  std::vector<double> alpha;  // final keep probabilities
  bool empty_selection = false;  // threshold modes may select nothing
  SearchTrace trace;
};

// True once the best validation loss has not improved by more than min_delta
// for `patience` consecutive epochs.
bool converged(std::span<const double> epoch_validation_losses, std::size_t patience,
               double min_delta);

// Alternating optimization: every training mini-batch updates the model
// weights under freshly sampled gates; every f-th weight update also draws a
// validation mini-batch and updates the controller. Weight updates never
// touch controller logits and controller updates never touch weights; the
// two consume disjoint splits, asserted via batch tags.
class SearchEngine {
 public:
  SearchEngine(const SearchConfig& config, const EncodedDataset& data,
               const DatasetSplits& splits);

  // Runs to convergence or the epoch cap and extracts the selection. On a
  // non-finite loss the partial trace is flushed to `sink` and the
  // NumericError propagates.
  SearchResult run(TraceSink* sink = nullptr);

  // Single-step entry points, exposed for tests.
  GateSample next_gates();
  double weight_step(const Batch& batch, const GateSample& gates);
  double controller_step(const Batch& batch, const GateSample& gates);
  double evaluate_validation_loss();
  double current_tau() const;

  RecModel& model() { return *model_; }
  Controller& controller() { return controller_; }
  std::size_t weight_updates() const { return weight_updates_; }
  std::size_t controller_updates() const { return controller_updates_; }

 private:
  SearchConfig config_;
  const EncodedDataset* data_;
  std::unique_ptr<RecModel> model_;
  Controller controller_;
  Adam weight_optimizer_;
  Adam controller_optimizer_;
  BatchIterator train_batches_;
  CyclingBatches validation_batches_;
  BatchIterator validation_eval_;
  Rng::Engine gumbel_engine_;
  Rng::Engine dropout_engine_;
  std::size_t weight_updates_ = 0;
  std::size_t controller_updates_ = 0;
};

}  // namespace autofield
