#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "autofield/data.hpp"
#include "autofield/retrain.hpp"

namespace autofield {

// Exhaustive subset study: retrain-and-evaluate every nonempty field subset
// (or every K-subset for the requested K values) under one reduced training
// budget, then rank a given selection inside its K-stratum.
struct OracleConfig {
  std::vector<std::size_t> k_filter;  // empty = all nonempty subsets
  std::size_t max_fields = 16;        // refuse larger N unless allow_large
  bool allow_large = false;
  std::size_t threads = 1;
  std::uint64_t seed = 0;     // shared training seed for comparability
  RetrainConfig retrain;      // per-subset budget (typically few fixed epochs)
};

struct SubsetRow {
  std::uint32_t mask = 0;  // bit n set = field n included
  std::size_t k = 0;
  double auc_score = 0.0;
  double logloss_score = 0.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;  // training wall clock
};

struct KSummary {
  std::size_t k = 0;
  std::size_t count = 0;
  double max_auc = 0.0;
  double median_auc = 0.0;
  double min_auc = 0.0;
};

struct SubsetReport {
  std::vector<SubsetRow> rows;  // ascending mask order, each subset once
  std::vector<KSummary> summaries;
};

std::uint32_t subset_mask(const std::vector<std::size_t>& fields);
std::vector<std::size_t> mask_fields(std::uint32_t mask);

// Trains every requested subset independently (worker pool of
// config.threads) and assembles rows in deterministic mask order regardless
// of completion order. `on_row` (optional) observes rows as they finish,
// serialized by a lock. Throws ConfigError when N exceeds the cap without
// allow_large.
SubsetReport enumerate_subsets(const OracleConfig& config, const EncodedDataset& data,
                               const DatasetSplits& splits,
                               const std::function<void(const SubsetRow&)>& on_row = {});

// Fraction of same-K subsets with strictly higher AUC than the selection;
// 0.0 means the selection is the stratum best. Throws ConfigError when the
// selection's subset is absent from the report.
double rank_selection(const SubsetReport& report, const std::vector<std::size_t>& selected);

}  // namespace autofield
