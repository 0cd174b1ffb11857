#include "gabs/eval/metrics.hpp"

#include <cmath>
#include <unordered_set>

namespace gabs {

double novel_word_pct(std::span<const TokenId> source_tokens,
                      std::span<const TokenId> hypothesis) {
  if (hypothesis.empty()) throw EmptyHypothesisError("novel-word rate needs a hypothesis");
  const std::unordered_set<TokenId> source(source_tokens.begin(), source_tokens.end());
  int novel = 0;
  for (TokenId id : hypothesis) {
    if (!source.count(id)) ++novel;
  }
  return 100.0 * static_cast<double>(novel) / static_cast<double>(hypothesis.size());
}

std::optional<int> divergence_position(std::span<const TokenId> first,
                                       std::span<const TokenId> second) {
  if (first.empty() || second.empty())
    throw InvalidInputError("divergence position needs non-empty sequences");
  const std::size_t shared = std::min(first.size(), second.size());
  for (std::size_t i = 0; i < shared; ++i) {
    if (first[i] != second[i]) return static_cast<int>(i) + 1;
  }
  if (first.size() != second.size()) return static_cast<int>(shared) + 1;
  return std::nullopt;
}

LengthStats length_stats(std::span<const ResultRecord> results) {
  if (results.empty()) throw EmptySetError("length statistics need at least one result");
  LengthStats stats;
  for (const ResultRecord& r : results) {
    stats.mean_length += static_cast<double>(r.length);
    stats.mean_abs_deviation += std::abs(static_cast<double>(r.length) - r.z);
  }
  stats.mean_length /= static_cast<double>(results.size());
  stats.mean_abs_deviation /= static_cast<double>(results.size());
  return stats;
}

}  // namespace gabs
