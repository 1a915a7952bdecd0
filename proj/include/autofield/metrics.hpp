#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace autofield {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

// Rank-based AUC (Mann-Whitney), ties assigned mean ranks, O(n log n).
// Requires at least one positive and one negative label; throws MetricError
// otherwise.
double auc(const ScoredSet& set);

// Quadratic pairwise oracle: mean over all positive/negative pairs of
// [score_pos > score_neg] + 0.5 * [score_pos == score_neg].
double auc_bruteforce(const ScoredSet& set);

// Mean negative log-likelihood with the training-loss clamp; shares the
// exact code path with the training loss so the two agree bitwise.
double logloss(const ScoredSet& set);

}  // namespace autofield
