#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "autofield/schema.hpp"

namespace autofield {

enum class SplitTag { train, validation, test };

const char* split_name(SplitTag tag);

// One mini-batch. Indices are row-major (B x N); every entry (b, n) is the
// hot coordinate of field n for example b.
struct Batch {
  SplitTag tag = SplitTag::train;
  std::size_t size = 0;
  std::size_t n_fields = 0;
  std::vector<std::uint32_t> indices;  // size * n_fields
  std::vector<std::uint8_t> labels;    // size

  std::uint32_t index(std::size_t b, std::size_t n) const {
    return indices[b * n_fields + n];
  }
};

// Fully encoded dataset: every row is N hot coordinates plus a binary label.
// Immutable after construction; safe to share across readers.
struct EncodedDataset {
  std::vector<FieldSchema> schema;
  Vocabulary vocab;
  std::vector<std::uint32_t> indices;  // n_rows * n_fields, row-major
  std::vector<std::uint8_t> labels;
  std::uint64_t seed = 0;  // provenance: generation or preparation seed

  std::size_t n_fields() const { return schema.size(); }
  std::size_t n_rows() const { return labels.size(); }
  std::uint32_t index(std::size_t row, std::size_t field) const {
    return indices[row * schema.size() + field];
  }
  std::vector<std::uint32_t> cardinalities() const;

  // Checks sizes, index ranges against the vocabulary, and binary labels.
  // Throws ContractViolation on the first violation.
  void validate() const;
};

// Disjoint row-id partition of a dataset.
struct DatasetSplits {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> validation;
  std::vector<std::uint32_t> test;
  std::uint64_t seed = 0;
};

// Uniform random assignment into three splits. Sizes are round(ratio * n)
// for train and validation, remainder for test; each split lands within one
// row of its exact share. Throws ConfigError unless ratios are nonnegative
// and sum to 1.
DatasetSplits split_dataset(std::size_t n_rows, std::array<double, 3> ratios,
                            std::uint64_t seed);

// Epoch-based mini-batch iterator over a row-id subset of a dataset. Each
// epoch visits every row exactly once; the shuffle order is a pure function
// of (seed, epoch).
class BatchIterator {
 public:
  BatchIterator(const EncodedDataset& data, std::vector<std::uint32_t> rows,
                std::size_t batch_size, bool shuffle, std::uint64_t seed,
                SplitTag tag);

  void start_epoch(std::size_t epoch);
  std::optional<Batch> next();

  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_batches() const;
  std::size_t batch_size() const { return batch_size_; }
  const std::vector<std::uint32_t>& current_order() const { return order_; }

 private:
  const EncodedDataset* data_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> order_;
  std::size_t batch_size_;
  bool shuffle_;
  std::uint64_t seed_;
  SplitTag tag_;
  std::size_t cursor_ = 0;
};

// Endless batch stream: restarts the underlying iterator whenever an epoch
// is exhausted. Used to pair one validation batch with each controller step.
class CyclingBatches {
 public:
  explicit CyclingBatches(BatchIterator iterator);
  Batch next();
  std::size_t epochs_completed() const { return epoch_; }

 private:
  BatchIterator iterator_;
  std::size_t epoch_ = 0;
};

struct ReadOptions {
  char delimiter = '\t';
  std::size_t label_column = 0;  // column holding the label
  bool has_header = false;
  // When set, raw labels parse as numbers and binarize to (value > threshold).
  // When unset, labels must already be exactly 0 or 1.
  std::optional<double> label_binarize_above;
};

// Reads a delimited text file with schema.size() field columns plus one label
// column (schema order = file column order with the label column removed).
// Numeric fields are bucketized during the read. Parse failures name the
// 1-based line number.
RawTable read_delimited(const std::string& path,
                        const std::vector<FieldSchema>& schema,
                        const ReadOptions& options);

// Encodes every row of `table` through `vocab`.
EncodedDataset encode_table(const RawTable& table, const Vocabulary& vocab,
                            std::uint64_t seed = 0);

// Versioned plain-text dataset format with an embedded schema + vocabulary
// header; round-trips exactly. Layout documented in the README.
void save_dataset(const EncodedDataset& data, const std::string& path);
EncodedDataset load_dataset(const std::string& path);

}  // namespace autofield
