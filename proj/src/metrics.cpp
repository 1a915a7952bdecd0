#include "autofield/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "autofield/error.hpp"
#include "autofield/ops.hpp"

namespace autofield {

namespace {

void validate(const ScoredSet& set) {
  if (set.scores.size() != set.labels.size()) {
    throw ContractViolation("scored set: score/label length mismatch");
  }
  std::size_t positives = 0;
  for (std::uint8_t y : set.labels) {
    if (y != 0 && y != 1) throw ContractViolation("scored set: label outside {0,1}");
    positives += y;
  }
  if (positives == 0 || positives == set.labels.size()) {
    throw MetricError("AUC undefined: input contains a single class");
  }
}

}  // namespace

double auc(const ScoredSet& set) {
  validate(set);
  const std::size_t n = set.scores.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });

  // Walk tie groups, assigning each member the mean rank of its group.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && set.scores[order[j]] == set.scores[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (set.labels[order[k]] == 1) {
        positive_rank_sum += mean_rank;
        ++positives;
      }
    }
    i = j;
  }

  const double p = static_cast<double>(positives);
  const double neg = static_cast<double>(n - positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * neg);
}

double auc_bruteforce(const ScoredSet& set) {
  validate(set);
  double hits = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    if (set.labels[i] != 1) continue;
    for (std::size_t j = 0; j < set.scores.size(); ++j) {
      if (set.labels[j] != 0) continue;
      ++pairs;
      if (set.scores[i] > set.scores[j]) {
        hits += 1.0;
      } else if (set.scores[i] == set.scores[j]) {
        hits += 0.5;
      }
    }
  }
  return hits / static_cast<double>(pairs);
}

double logloss(const ScoredSet& set) {
  return bce_mean(set.scores, set.labels);
}

}  // namespace autofield
