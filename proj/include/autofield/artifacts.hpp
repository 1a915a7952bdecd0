#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "autofield/enumerate.hpp"
#include "autofield/retrain.hpp"
#include "autofield/search.hpp"

namespace autofield {

// Streams search trace records as JSON lines; the first line is a meta
// record carrying the config hash and seed so the file is self-describing.
class JsonlTraceWriter : public TraceSink {
 public:
  JsonlTraceWriter(const std::string& path, const std::string& config_hash,
                   std::uint64_t seed, const std::string& mode);

  void on_step(const StepRecord& record) override;
  void on_epoch(const EpochRecord& record) override;
  void flush() override;

 private:
  std::ofstream out_;
};

// Final selection artifact (selection.json): byte-stable for a fixed
// config + seed.
void write_selection(const std::string& path, const std::string& config_hash,
                     std::uint64_t seed, const std::string& mode, std::size_t k,
                     const std::vector<std::size_t>& selected,
                     const std::vector<double>& alpha, bool empty_selection);

// Retrain report artifact (report.json).
void write_retrain_report(const std::string& path, const std::string& config_hash,
                          std::uint64_t seed, const RetrainReport& report);

// One row of the unified results ledger (results.csv). `kind` distinguishes
// where the row came from: "selection" (pipeline/search selection retrain),
// "retrain" (standalone retrain), "enum" (oracle subset).
struct LedgerRow {
  std::string config_hash;
  std::string kind;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t n_fields = 0;
  std::uint32_t subset_mask = 0;
  std::string fields;  // pipe-joined field ids, e.g. "0|2|5"
  double auc_score = 0.0;
  double logloss_score = 0.0;
  std::size_t epochs = 0;
  double seconds = 0.0;
  double infer_ms_per_batch = 0.0;
};

extern const char* const kLedgerHeader;

std::string joined_fields(const std::vector<std::size_t>& fields);

// Appends one row, creating the file with its header line first if needed.
void append_ledger(const std::string& path, const LedgerRow& row);

// Parses a ledger; a header mismatch is an error naming the offending file.
std::vector<LedgerRow> read_ledger(const std::string& path);

struct MergeResult {
  std::vector<LedgerRow> rows;        // input order, duplicates dropped
  std::size_t duplicates_dropped = 0;
};

// Merges ledgers, deduplicating on (config_hash, kind, seed, subset_mask, k).
MergeResult merge_ledgers(const std::vector<std::string>& paths);

void write_ledger(const std::string& path, const std::vector<LedgerRow>& rows);

// Plot-ready scatter data: k, auc, is_selection (enum rows are 0, selection
// and retrain rows are 1).
void write_scatter(const std::string& path, const std::vector<LedgerRow>& rows);

// Human-readable percentile lines for every selection-kind row against the
// enum rows of the same K (fraction of strictly higher AUCs; 0 = best).
std::vector<std::string> selection_percentiles(const std::vector<LedgerRow>& rows);

// Oracle artifacts: the per-subset CSV (spec columns) and the per-K summary.
void write_subsets_csv(const std::string& path, const SubsetReport& report);
void write_enumeration_summary(const std::string& path, const std::string& config_hash,
                               std::uint64_t seed, const SubsetReport& report);

}  // namespace autofield
