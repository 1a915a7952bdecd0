#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace autofield {

enum class FieldKind { categorical, numeric };

struct FieldSchema {
  std::size_t field_id = 0;  // contiguous 0..N-1
  std::string name;
  FieldKind kind = FieldKind::categorical;
  std::size_t min_frequency = 2;  // tokens below this map to the OOV bucket
};

// Per-field token -> dense index maps. Index 0 is always the out-of-vocabulary
// bucket, so cardinality D_n = 1 + number of retained tokens and every mapped
// index lies in [0, D_n).
class Vocabulary {
 public:
  static constexpr std::uint32_t kOovIndex = 0;

  Vocabulary() = default;
  explicit Vocabulary(std::size_t n_fields)
      : index_(n_fields), cardinality_(n_fields, 1) {}

  std::size_t n_fields() const { return index_.size(); }
  std::uint32_t cardinality(std::size_t field) const { return cardinality_[field]; }

  std::uint32_t lookup(std::size_t field, const std::string& token) const {
    const auto& map = index_[field];
    auto it = map.find(token);
    return it == map.end() ? kOovIndex : it->second;
  }

  // Assigns the next free index (>= 1) to `token`; returns the index. Used by
  // the builder and the dataset loader only.
  std::uint32_t insert(std::size_t field, const std::string& token) {
    auto [it, added] = index_[field].emplace(token, cardinality_[field]);
    if (added) ++cardinality_[field];
    return it->second;
  }

  const std::unordered_map<std::string, std::uint32_t>& field_tokens(std::size_t field) const {
    return index_[field];
  }

 private:
  std::vector<std::unordered_map<std::string, std::uint32_t>> index_;
  std::vector<std::uint32_t> cardinality_;
};

// Raw rows after delimiter splitting and numeric bucketization; tokens only,
// label already extracted.
struct RawTable {
  std::vector<FieldSchema> schema;
  std::vector<std::vector<std::string>> rows;  // rows x N tokens
  std::vector<std::uint8_t> labels;
};

// Criteo-style bucketization for numeric fields: missing -> "NA", v <= 2 kept
// verbatim, v > 2 -> floor(ln(v)^2). Throws ParseError on a non-numeric,
// non-missing token.
std::string bucketize_numeric(const std::string& raw);

// Single counting pass over the rows, then index assignment in first-seen
// order for tokens meeting the schema's per-field min_frequency.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& rows,
                            const std::vector<FieldSchema>& schema);

// Same, but `min_frequency` overrides every field's threshold.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& rows,
                            const std::vector<FieldSchema>& schema,
                            std::size_t min_frequency);

// Entry n = vocab index of token n, OOV index if unseen. Row arity must match
// the vocabulary.
std::vector<std::uint32_t> encode_row(const std::vector<std::string>& row,
                                      const Vocabulary& vocab);

}  // namespace autofield
