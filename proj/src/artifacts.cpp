#include "autofield/artifacts.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "autofield/error.hpp"

namespace autofield {
namespace {

using nlohmann::json;

// Round-trip-exact double formatting for CSV cells.
std::string format_double(double value) {
  // Shortest decimal form that parses back to the same double.
  char buffer[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

json alpha_array(const std::vector<double>& values) {
  json array = json::array();
  for (double v : values) array.push_back(v);
  return array;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

JsonlTraceWriter::JsonlTraceWriter(const std::string& path, const std::string& config_hash,
                                   std::uint64_t seed, const std::string& mode)
    : out_(path) {
  if (!out_) throw Error("cannot open trace file: " + path);
  json meta{{"type", "meta"}, {"config_hash", config_hash}, {"seed", seed}, {"mode", mode}};
  out_ << meta.dump() << "\n";
}

void JsonlTraceWriter::on_step(const StepRecord& record) {
  json line{{"type", "step"},
            {"step", record.step},
            {"tau", record.tau},
            {"train_loss", record.train_loss},
            {"gate", alpha_array(record.gate)}};
  if (record.validation_loss) {
    line["validation_loss"] = *record.validation_loss;
    line["alpha"] = alpha_array(record.alpha);
  }
  out_ << line.dump() << "\n";
}

void JsonlTraceWriter::on_epoch(const EpochRecord& record) {
  json line{{"type", "epoch"},
            {"epoch", record.epoch},
            {"mean_train_loss", record.mean_train_loss},
            {"validation_loss", record.validation_loss},
            {"seconds", record.seconds}};
  out_ << line.dump() << "\n";
}

void JsonlTraceWriter::flush() { out_.flush(); }

void write_selection(const std::string& path, const std::string& config_hash,
                     std::uint64_t seed, const std::string& mode, std::size_t k,
                     const std::vector<std::size_t>& selected,
                     const std::vector<double>& alpha, bool empty_selection) {
  json doc{{"config_hash", config_hash},
           {"seed", seed},
           {"mode", mode},
           {"k", k},
           {"selected", selected},
           {"keep_probability", alpha_array(alpha)},
           {"empty_selection", empty_selection}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open selection file: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error("write failed: " + path);
}

void write_retrain_report(const std::string& path, const std::string& config_hash,
                          std::uint64_t seed, const RetrainReport& report) {
  json epochs = json::array();
  for (const auto& e : report.epoch_log) {
    json entry{{"epoch", e.epoch},
               {"mean_train_loss", e.mean_train_loss},
               {"validation_logloss", e.validation_logloss},
               {"seconds", e.seconds}};
    if (std::isfinite(e.validation_auc)) entry["validation_auc"] = e.validation_auc;
    epochs.push_back(entry);
  }
  json doc{{"config_hash", config_hash},
           {"seed", seed},
           {"selected", report.selected},
           {"test_auc", report.test_auc},
           {"test_logloss", report.test_logloss},
           {"epochs", report.epochs},
           {"train_seconds", report.train_seconds},
           {"infer_ms_per_batch", report.infer_ms_per_batch},
           {"epoch_log", epochs}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open report file: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error("write failed: " + path);
}

const char* const kLedgerHeader =
    "config_hash,kind,seed,k,n_fields,subset_mask,fields,auc,logloss,epochs,seconds,"
    "infer_ms_per_batch";

std::string joined_fields(const std::vector<std::size_t>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(fields[i]);
  }
  return out;
}

void append_ledger(const std::string& path, const LedgerRow& row) {
  const bool exists = std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open ledger file: " + path);
  if (!exists) out << kLedgerHeader << "\n";
  out << row.config_hash << ',' << row.kind << ',' << row.seed << ',' << row.k << ','
      << row.n_fields << ',' << row.subset_mask << ',' << row.fields << ','
      << format_double(row.auc_score) << ',' << format_double(row.logloss_score) << ','
      << row.epochs << ',' << format_double(row.seconds) << ','
      << format_double(row.infer_ms_per_batch) << "\n";
  if (!out) throw Error("write failed: " + path);
}

std::vector<LedgerRow> read_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ledger file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kLedgerHeader) {
    throw Error("ledger schema mismatch in " + path + ": expected header '" +
                kLedgerHeader + "'");
  }
  std::vector<LedgerRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 12) {
      throw Error("ledger schema mismatch in " + path + " line " + std::to_string(line_no) +
                  ": expected 12 columns, got " + std::to_string(cells.size()));
    }
    LedgerRow row;
    row.config_hash = cells[0];
    row.kind = cells[1];
    try {
      row.seed = std::stoull(cells[2]);
      row.k = std::stoull(cells[3]);
      row.n_fields = std::stoull(cells[4]);
      row.subset_mask = static_cast<std::uint32_t>(std::stoul(cells[5]));
      row.fields = cells[6];
      row.auc_score = std::stod(cells[7]);
      row.logloss_score = std::stod(cells[8]);
      row.epochs = std::stoull(cells[9]);
      row.seconds = std::stod(cells[10]);
      row.infer_ms_per_batch = std::stod(cells[11]);
    } catch (const std::exception&) {
      throw Error("ledger parse failure in " + path + " line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MergeResult merge_ledgers(const std::vector<std::string>& paths) {
  MergeResult result;
  std::set<std::tuple<std::string, std::string, std::uint64_t, std::uint32_t, std::size_t>> seen;
  for (const auto& path : paths) {
    for (auto& row : read_ledger(path)) {
      auto key = std::make_tuple(row.config_hash, row.kind, row.seed, row.subset_mask, row.k);
      if (!seen.insert(key).second) {
        ++result.duplicates_dropped;
        continue;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_ledger(const std::string& path, const std::vector<LedgerRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open ledger file: " + path);
  out << kLedgerHeader << "\n";
  out.close();
  for (const auto& row : rows) append_ledger(path, row);
}

void write_scatter(const std::string& path, const std::vector<LedgerRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open scatter file: " + path);
  out << "k,auc,is_selection\n";
  for (const auto& row : rows) {
    out << row.k << ',' << format_double(row.auc_score) << ','
        << (row.kind == "enum" ? 0 : 1) << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<std::string> selection_percentiles(const std::vector<LedgerRow>& rows) {
  std::vector<std::string> lines;
  for (const auto& row : rows) {
    if (row.kind == "enum") continue;
    std::size_t stratum = 0;
    std::size_t higher = 0;
    for (const auto& other : rows) {
      if (other.kind != "enum" || other.k != row.k) continue;
      ++stratum;
      if (other.auc_score > row.auc_score) ++higher;
    }
    std::ostringstream line;
    line << row.kind << " fields=" << row.fields << " k=" << row.k
         << " auc=" << format_double(row.auc_score);
    if (stratum == 0) {
      line << " percentile=n/a (no enumeration rows for this K)";
    } else {
      line << " percentile=" << format_double(static_cast<double>(higher) /
                                              static_cast<double>(stratum))
           << " (" << higher << " of " << stratum << " strictly higher)";
    }
    lines.push_back(line.str());
  }
  return lines;
}

void write_subsets_csv(const std::string& path, const SubsetReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open subsets file: " + path);
  out << "subset_mask,k,auc,logloss,seed,seconds\n";
  for (const auto& row : report.rows) {
    out << row.mask << ',' << row.k << ',' << format_double(row.auc_score) << ','
        << format_double(row.logloss_score) << ',' << row.seed << ','
        << format_double(row.seconds) << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

void write_enumeration_summary(const std::string& path, const std::string& config_hash,
                               std::uint64_t seed, const SubsetReport& report) {
  json strata = json::array();
  for (const auto& s : report.summaries) {
    strata.push_back(json{{"k", s.k},
                          {"count", s.count},
                          {"max_auc", s.max_auc},
                          {"median_auc", s.median_auc},
                          {"min_auc", s.min_auc}});
  }
  json doc{{"config_hash", config_hash},
           {"seed", seed},
           {"subsets", report.rows.size()},
           {"strata", strata}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open summary file: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error("write failed: " + path);
}

}  // namespace autofield
