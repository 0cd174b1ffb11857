#ifndef GABS_EVAL_METRICS_HPP
#define GABS_EVAL_METRICS_HPP

#include <optional>
#include <span>

#include "gabs/io/records.hpp"

namespace gabs {

// Percentage of hypothesis positions whose token type does not occur in the
// source.
double novel_word_pct(std::span<const TokenId> source_tokens,
                      std::span<const TokenId> hypothesis);

// 1-based index of the first position where the sequences differ; a length
// difference diverges at the shorter sequence's end + 1; nullopt if identical.
std::optional<int> divergence_position(std::span<const TokenId> first,
                                       std::span<const TokenId> second);

struct LengthStats {
  double mean_length = 0.0;
  double mean_abs_deviation = 0.0;  // mean |length - Z|
};

LengthStats length_stats(std::span<const ResultRecord> results);

}  // namespace gabs

#endif  // GABS_EVAL_METRICS_HPP
