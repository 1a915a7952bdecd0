#include "autofield/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "autofield/error.hpp"
#include "autofield/rng.hpp"

namespace autofield {
namespace {

// Percent-encoding for tokens and names inside the dataset text format:
// bytes outside the printable ASCII range, '%', and space become %XX. The
// empty string encodes as a bare "%", which no valid escape produces.
std::string encode_token(const std::string& token) {
  if (token.empty()) return "%";
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(token.size());
  for (unsigned char c : token) {
    if (c <= 0x20 || c >= 0x7F || c == '%') {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::string decode_token(const std::string& encoded) {
  if (encoded == "%") return std::string();
  std::string out;
  out.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] != '%') {
      out.push_back(encoded[i]);
      continue;
    }
    if (i + 2 >= encoded.size()) throw ParseError("truncated escape in token '" + encoded + "'");
    const int hi = hex_digit(encoded[i + 1]);
    const int lo = hex_digit(encoded[i + 2]);
    if (hi < 0 || lo < 0) throw ParseError("bad escape in token '" + encoded + "'");
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 2;
  }
  return out;
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& raw, std::size_t line_no, const char* what) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(raw.c_str(), &end);
  if (errno != 0 || end == raw.c_str() || *end != '\0') {
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                     " is not numeric: '" + raw + "'");
  }
  return value;
}

}  // namespace

const char* split_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::validation: return "validation";
    case SplitTag::test: return "test";
  }
  return "?";
}

std::vector<std::uint32_t> EncodedDataset::cardinalities() const {
  std::vector<std::uint32_t> out(schema.size());
  for (std::size_t n = 0; n < schema.size(); ++n) out[n] = vocab.cardinality(n);
  return out;
}

void EncodedDataset::validate() const {
  const std::size_t n = n_fields();
  if (vocab.n_fields() != n) throw ContractViolation("dataset: vocab/schema field count mismatch");
  if (indices.size() != labels.size() * n) {
    throw ContractViolation("dataset: index buffer size does not match rows x fields");
  }
  for (std::size_t r = 0; r < n_rows(); ++r) {
    if (labels[r] > 1) {
      throw ContractViolation("dataset: label at row " + std::to_string(r) + " is not binary");
    }
    for (std::size_t f = 0; f < n; ++f) {
      if (index(r, f) >= vocab.cardinality(f)) {
        throw ContractViolation("dataset: index out of range at row " + std::to_string(r) +
                                " field " + std::to_string(f));
      }
    }
  }
}

DatasetSplits split_dataset(std::size_t n_rows, std::array<double, 3> ratios,
                            std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw ConfigError("split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  std::vector<std::uint32_t> permutation(n_rows);
  std::iota(permutation.begin(), permutation.end(), 0u);
  auto engine = Rng(seed).stream("split");
  shuffle_in_place(permutation, engine);

  std::size_t n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n_rows)));
  n_train = std::min(n_train, n_rows);
  std::size_t n_val = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n_rows)));
  n_val = std::min(n_val, n_rows - n_train);

  DatasetSplits splits;
  splits.seed = seed;
  splits.train.assign(permutation.begin(), permutation.begin() + static_cast<std::ptrdiff_t>(n_train));
  splits.validation.assign(permutation.begin() + static_cast<std::ptrdiff_t>(n_train),
                           permutation.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  splits.test.assign(permutation.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), permutation.end());
  std::sort(splits.train.begin(), splits.train.end());
  std::sort(splits.validation.begin(), splits.validation.end());
  std::sort(splits.test.begin(), splits.test.end());
  return splits;
}

BatchIterator::BatchIterator(const EncodedDataset& data, std::vector<std::uint32_t> rows,
                             std::size_t batch_size, bool shuffle, std::uint64_t seed,
                             SplitTag tag)
    : data_(&data), rows_(std::move(rows)), batch_size_(batch_size),
      shuffle_(shuffle), seed_(seed), tag_(tag) {
  if (batch_size_ == 0) throw ContractViolation("batch_size must be >= 1");
  for (std::uint32_t row : rows_) {
    if (row >= data.n_rows()) throw ContractViolation("batch iterator row id out of range");
  }
  start_epoch(0);
}

void BatchIterator::start_epoch(std::size_t epoch) {
  order_ = rows_;
  if (shuffle_) {
    auto engine = Rng(seed_).stream("epoch." + std::to_string(epoch));
    shuffle_in_place(order_, engine);
  }
  cursor_ = 0;
}

std::size_t BatchIterator::n_batches() const {
  return (rows_.size() + batch_size_ - 1) / batch_size_;
}

std::optional<Batch> BatchIterator::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t count = std::min(batch_size_, order_.size() - cursor_);
  const std::size_t n = data_->n_fields();

  Batch batch;
  batch.tag = tag_;
  batch.size = count;
  batch.n_fields = n;
  batch.indices.resize(count * n);
  batch.labels.resize(count);
  for (std::size_t b = 0; b < count; ++b) {
    const std::uint32_t row = order_[cursor_ + b];
    const std::uint32_t* src = data_->indices.data() + static_cast<std::size_t>(row) * n;
    std::copy(src, src + n, batch.indices.data() + b * n);
    batch.labels[b] = data_->labels[row];
  }
  cursor_ += count;
  return batch;
}

CyclingBatches::CyclingBatches(BatchIterator iterator) : iterator_(std::move(iterator)) {
  if (iterator_.n_rows() == 0) throw ContractViolation("cannot cycle over an empty split");
  iterator_.start_epoch(0);
}

Batch CyclingBatches::next() {
  auto batch = iterator_.next();
  if (!batch) {
    ++epoch_;
    iterator_.start_epoch(epoch_);
    batch = iterator_.next();
  }
  return *batch;
}

RawTable read_delimited(const std::string& path, const std::vector<FieldSchema>& schema,
                        const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path);

  const std::size_t n_fields = schema.size();
  const std::size_t n_columns = n_fields + 1;
  if (options.label_column >= n_columns) {
    throw ConfigError("label_column " + std::to_string(options.label_column) +
                      " out of range for " + std::to_string(n_columns) + " columns");
  }

  RawTable table;
  table.schema = schema;

  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (line.empty()) continue;

    auto parts = split_line(line, options.delimiter);
    if (parts.size() != n_columns) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_columns) + " columns, got " +
                       std::to_string(parts.size()));
    }

    const double raw_label = parse_double(parts[options.label_column], line_no, "label");
    std::uint8_t label = 0;
    if (options.label_binarize_above) {
      label = raw_label > *options.label_binarize_above ? 1 : 0;
    } else {
      if (raw_label != 0.0 && raw_label != 1.0) {
        throw ParseError("line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                         parts[options.label_column] + "'");
      }
      label = raw_label == 1.0 ? 1 : 0;
    }

    std::vector<std::string> row;
    row.reserve(n_fields);
    std::size_t field = 0;
    for (std::size_t c = 0; c < parts.size(); ++c) {
      if (c == options.label_column) continue;
      if (schema[field].kind == FieldKind::numeric) {
        try {
          row.push_back(bucketize_numeric(parts[c]));
        } catch (const ParseError& e) {
          throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
      } else {
        row.push_back(parts[c]);
      }
      ++field;
    }
    table.rows.push_back(std::move(row));
    table.labels.push_back(label);
  }
  return table;
}

EncodedDataset encode_table(const RawTable& table, const Vocabulary& vocab,
                            std::uint64_t seed) {
  EncodedDataset data;
  data.schema = table.schema;
  data.vocab = vocab;
  data.seed = seed;
  data.labels = table.labels;
  data.indices.reserve(table.rows.size() * table.schema.size());
  for (const auto& row : table.rows) {
    const auto encoded = encode_row(row, vocab);
    data.indices.insert(data.indices.end(), encoded.begin(), encoded.end());
  }
  data.validate();
  return data;
}

void save_dataset(const EncodedDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);

  out << "autofield.dataset.v1\n";
  out << "fields " << data.n_fields() << "\n";
  out << "rows " << data.n_rows() << "\n";
  out << "seed " << data.seed << "\n";
  for (const auto& field : data.schema) {
    out << "field " << field.field_id << ' '
        << (field.kind == FieldKind::numeric ? "numeric" : "categorical") << ' '
        << field.min_frequency << ' ' << encode_token(field.name) << "\n";
  }
  for (std::size_t n = 0; n < data.n_fields(); ++n) {
    // Emit tokens in index order so the loader can reinsert them verbatim.
    std::vector<const std::string*> by_index(data.vocab.cardinality(n), nullptr);
    for (const auto& [token, index] : data.vocab.field_tokens(n)) {
      by_index[index] = &token;
    }
    for (std::size_t i = 1; i < by_index.size(); ++i) {
      out << "vocab " << n << ' ' << i << ' ' << encode_token(*by_index[i]) << "\n";
    }
  }
  out << "data\n";
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    for (std::size_t f = 0; f < data.n_fields(); ++f) {
      out << data.index(r, f) << ' ';
    }
    out << static_cast<int>(data.labels[r]) << "\n";
  }
  out << "end\n";
  if (!out) throw Error("write failed: " + path);
}

EncodedDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line) || line != "autofield.dataset.v1") {
    throw ParseError(path + ": not an autofield.dataset.v1 file");
  }

  auto read_kv = [&](const char* key) -> std::uint64_t {
    if (!std::getline(in, line)) throw ParseError(path + ": truncated header");
    std::istringstream ss(line);
    std::string k;
    std::uint64_t v = 0;
    if (!(ss >> k >> v) || k != key) {
      throw ParseError(path + ": expected '" + key + "' header line, got '" + line + "'");
    }
    return v;
  };

  const std::size_t n_fields = read_kv("fields");
  const std::size_t n_rows = read_kv("rows");
  const std::uint64_t seed = read_kv("seed");

  EncodedDataset data;
  data.seed = seed;
  data.schema.resize(n_fields);
  data.vocab = Vocabulary(n_fields);

  for (std::size_t n = 0; n < n_fields; ++n) {
    if (!std::getline(in, line)) throw ParseError(path + ": truncated schema section");
    std::istringstream ss(line);
    std::string tag, kind, name;
    std::size_t id = 0, min_freq = 0;
    if (!(ss >> tag >> id >> kind >> min_freq >> name) || tag != "field" || id != n) {
      throw ParseError(path + ": bad field line '" + line + "'");
    }
    FieldSchema& field = data.schema[n];
    field.field_id = id;
    field.name = decode_token(name);
    field.min_frequency = min_freq;
    if (kind == "numeric") {
      field.kind = FieldKind::numeric;
    } else if (kind == "categorical") {
      field.kind = FieldKind::categorical;
    } else {
      throw ParseError(path + ": unknown field kind '" + kind + "'");
    }
  }

  while (std::getline(in, line)) {
    if (line == "data") break;
    std::istringstream ss(line);
    std::string tag, token;
    std::size_t field = 0, index = 0;
    if (!(ss >> tag >> field >> index >> token) || tag != "vocab" || field >= n_fields) {
      throw ParseError(path + ": bad vocab line '" + line + "'");
    }
    const std::uint32_t assigned = data.vocab.insert(field, decode_token(token));
    if (assigned != index) {
      throw ParseError(path + ": vocab line out of order for field " + std::to_string(field));
    }
  }
  if (line != "data") throw ParseError(path + ": missing data section");

  data.indices.reserve(n_rows * n_fields);
  data.labels.reserve(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!std::getline(in, line)) throw ParseError(path + ": truncated data section");
    std::istringstream ss(line);
    for (std::size_t f = 0; f < n_fields; ++f) {
      std::uint32_t v = 0;
      if (!(ss >> v)) throw ParseError(path + ": bad data row " + std::to_string(r));
      data.indices.push_back(v);
    }
    int label = -1;
    if (!(ss >> label) || (label != 0 && label != 1)) {
      throw ParseError(path + ": bad label in data row " + std::to_string(r));
    }
    data.labels.push_back(static_cast<std::uint8_t>(label));
  }
  if (!std::getline(in, line) || line != "end") {
    throw ParseError(path + ": missing end marker");
  }
  data.validate();
  return data;
}

}  // namespace autofield
