#ifndef GABS_EVAL_ROUGE_HPP
#define GABS_EVAL_ROUGE_HPP

#include <span>

#include "gabs/core/types.hpp"

namespace gabs {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const RougeScore&) const = default;
};

enum class RougeOrder { One, Two, Lcs };

// Overlap metrics over token ids: clipped n-gram counts for orders 1 and 2,
// longest-common-subsequence length for Lcs. An empty hypothesis scores zero;
// an empty reference is an error.
RougeScore rouge(std::span<const TokenId> reference, std::span<const TokenId> hypothesis,
                 RougeOrder order);

}  // namespace gabs

#endif  // GABS_EVAL_ROUGE_HPP
