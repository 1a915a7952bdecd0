#include "autofield/enumerate.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <mutex>
#include <thread>

#include "autofield/error.hpp"

namespace autofield {

std::uint32_t subset_mask(const std::vector<std::size_t>& fields) {
  std::uint32_t mask = 0;
  for (std::size_t f : fields) {
    if (f >= 32) throw ConfigError("subset_mask: field id too large");
    const std::uint32_t bit = 1u << f;
    if (mask & bit) throw ConfigError("subset_mask: duplicate field id");
    mask |= bit;
  }
  return mask;
}

std::vector<std::size_t> mask_fields(std::uint32_t mask) {
  std::vector<std::size_t> fields;
  for (std::size_t f = 0; f < 32; ++f) {
    if (mask & (1u << f)) fields.push_back(f);
  }
  return fields;
}

SubsetReport enumerate_subsets(const OracleConfig& config, const EncodedDataset& data,
                               const DatasetSplits& splits,
                               const std::function<void(const SubsetRow&)>& on_row) {
  const std::size_t n = data.n_fields();
  if (n > config.max_fields && !config.allow_large) {
    throw ConfigError("enumeration refused: " + std::to_string(n) + " fields exceeds the cap of " +
                      std::to_string(config.max_fields) +
                      " (2^N trainings); pass allow_large to override");
  }
  if (n > 31) throw ConfigError("enumeration supports at most 31 fields");
  for (std::size_t k : config.k_filter) {
    if (k < 1 || k > n) throw ConfigError("enumeration K filter value out of [1, N]");
  }

  std::vector<std::uint32_t> masks;
  const std::uint32_t all = (1u << n) - 1;
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    const std::size_t k = static_cast<std::size_t>(std::popcount(mask));
    if (config.k_filter.empty() ||
        std::find(config.k_filter.begin(), config.k_filter.end(), k) != config.k_filter.end()) {
      masks.push_back(mask);
    }
  }

  SubsetReport report;
  report.rows.resize(masks.size());

  RetrainConfig budget = config.retrain;
  budget.seed = config.seed;

  std::mutex row_lock;
  auto train_one = [&](std::size_t i) {
    const std::uint32_t mask = masks[i];
    RetrainOutcome outcome = run_retrain(budget, mask_fields(mask), data, splits);
    SubsetRow row;
    row.mask = mask;
    row.k = static_cast<std::size_t>(std::popcount(mask));
    row.auc_score = outcome.report.test_auc;
    row.logloss_score = outcome.report.test_logloss;
    row.seed = config.seed;
    row.seconds = outcome.report.train_seconds;
    if (on_row) {
      const std::lock_guard<std::mutex> guard(row_lock);
      on_row(row);
    }
    report.rows[i] = row;
  };

  if (config.threads <= 1) {
    for (std::size_t i = 0; i < masks.size(); ++i) train_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_lock;
    std::exception_ptr first_error;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= masks.size()) return;
        try {
          train_one(i);
        } catch (...) {
          const std::lock_guard<std::mutex> guard(error_lock);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(config.threads, masks.size());
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Per-K distribution summaries over the assembled rows.
  std::vector<std::size_t> ks;
  for (const auto& row : report.rows) ks.push_back(row.k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (std::size_t k : ks) {
    std::vector<double> values;
    for (const auto& row : report.rows) {
      if (row.k == k) values.push_back(row.auc_score);
    }
    std::sort(values.begin(), values.end());
    KSummary summary;
    summary.k = k;
    summary.count = values.size();
    summary.min_auc = values.front();
    summary.max_auc = values.back();
    summary.median_auc = values.size() % 2 == 1
                             ? values[values.size() / 2]
                             : 0.5 * (values[values.size() / 2 - 1] + values[values.size() / 2]);
    report.summaries.push_back(summary);
  }
  return report;
}

double rank_selection(const SubsetReport& report, const std::vector<std::size_t>& selected) {
  if (selected.empty()) throw ConfigError("rank_selection: empty selection");
  const std::uint32_t mask = subset_mask(selected);
  const std::size_t k = selected.size();

  const SubsetRow* own = nullptr;
  std::size_t stratum = 0;
  std::size_t higher = 0;
  for (const auto& row : report.rows) {
    if (row.k != k) continue;
    ++stratum;
    if (row.mask == mask) own = &row;
  }
  if (!own) {
    throw ConfigError("rank_selection: subset mask " + std::to_string(mask) +
                      " not present in the report's K=" + std::to_string(k) + " stratum");
  }
  for (const auto& row : report.rows) {
    if (row.k == k && row.auc_score > own->auc_score) ++higher;
  }
  return static_cast<double>(higher) / static_cast<double>(stratum);
}

}  // namespace autofield
