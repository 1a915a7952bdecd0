#include "autofield/schema.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "autofield/error.hpp"

namespace autofield {

std::string bucketize_numeric(const std::string& raw) {
  if (raw.empty() || raw == "NA") return "NA";

  errno = 0;
  char* end = nullptr;
  const long long value = std::strtoll(raw.c_str(), &end, 10);
  if (errno != 0 || end == raw.c_str() || *end != '\0') {
    throw ParseError("bucketize_numeric: not an integer: '" + raw + "'");
  }
  if (value <= 2) return std::to_string(value);
  const double log_value = std::log(static_cast<double>(value));
  return std::to_string(static_cast<long long>(std::floor(log_value * log_value)));
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& rows,
                            const std::vector<FieldSchema>& schema) {
  const std::size_t n_fields = schema.size();
  for (std::size_t n = 0; n < n_fields; ++n) {
    if (schema[n].field_id != n) {
      throw ConfigError("schema field_ids must be contiguous 0..N-1");
    }
    if (schema[n].min_frequency < 1) {
      throw ConfigError("min_frequency must be >= 1 for field '" + schema[n].name + "'");
    }
  }

  // Counting pass; track first-seen order so index assignment is stable.
  std::vector<std::unordered_map<std::string, std::size_t>> counts(n_fields);
  std::vector<std::vector<const std::string*>> seen_order(n_fields);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != n_fields) {
      throw ParseError("row " + std::to_string(r + 1) + ": expected " +
                       std::to_string(n_fields) + " columns, got " +
                       std::to_string(row.size()));
    }
    for (std::size_t n = 0; n < n_fields; ++n) {
      auto [it, added] = counts[n].emplace(row[n], 0);
      ++it->second;
      if (added) seen_order[n].push_back(&it->first);
    }
  }

  Vocabulary vocab(n_fields);
  for (std::size_t n = 0; n < n_fields; ++n) {
    for (const std::string* token : seen_order[n]) {
      if (counts[n][*token] >= schema[n].min_frequency) {
        vocab.insert(n, *token);
      }
    }
  }
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& rows,
                            const std::vector<FieldSchema>& schema,
                            std::size_t min_frequency) {
  std::vector<FieldSchema> overridden = schema;
  for (auto& field : overridden) field.min_frequency = min_frequency;
  return build_vocabulary(rows, overridden);
}

std::vector<std::uint32_t> encode_row(const std::vector<std::string>& row,
                                      const Vocabulary& vocab) {
  if (row.size() != vocab.n_fields()) {
    throw ParseError("encode_row: expected " + std::to_string(vocab.n_fields()) +
                     " tokens, got " + std::to_string(row.size()));
  }
  std::vector<std::uint32_t> indices(row.size());
  for (std::size_t n = 0; n < row.size(); ++n) {
    indices[n] = vocab.lookup(n, row[n]);
  }
  return indices;
}

}  // namespace autofield
