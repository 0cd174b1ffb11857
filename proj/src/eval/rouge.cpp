#include "gabs/eval/rouge.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

namespace gabs {

namespace {

using NGramCounts = std::map<std::uint64_t, int>;

// Orders 1 and 2 only, so an n-gram packs into one 64-bit key.
NGramCounts count_ngrams(std::span<const TokenId> tokens, int n) {
  NGramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::uint64_t key = static_cast<std::uint32_t>(tokens[i]);
    if (n == 2) key = (key << 32) | static_cast<std::uint32_t>(tokens[i + 1]);
    ++counts[key];
  }
  return counts;
}

RougeScore from_counts(double overlap, double hyp_units, double ref_units) {
  RougeScore score;
  score.precision = hyp_units > 0.0 ? overlap / hyp_units : 0.0;
  score.recall = ref_units > 0.0 ? overlap / ref_units : 0.0;
  score.f1 = (score.precision + score.recall) > 0.0
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

int lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<int> prev(b.size() + 1, 0);
  std::vector<int> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

}  // namespace

RougeScore rouge(std::span<const TokenId> reference, std::span<const TokenId> hypothesis,
                 RougeOrder order) {
  if (reference.empty()) throw EmptyReferenceError("rouge needs a non-empty reference");
  if (hypothesis.empty()) return {};

  if (order == RougeOrder::Lcs) {
    const double lcs = lcs_length(reference, hypothesis);
    return from_counts(lcs, static_cast<double>(hypothesis.size()),
                       static_cast<double>(reference.size()));
  }

  const int n = order == RougeOrder::One ? 1 : 2;
  const NGramCounts ref_counts = count_ngrams(reference, n);
  const NGramCounts hyp_counts = count_ngrams(hypothesis, n);
  double overlap = 0.0;
  double hyp_units = 0.0;
  double ref_units = 0.0;
  for (const auto& [gram, c] : ref_counts) ref_units += c;
  for (const auto& [gram, c] : hyp_counts) {
    hyp_units += c;
    auto it = ref_counts.find(gram);
    // Clipped counting: per-gram overlap capped at the reference multiplicity.
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  return from_counts(overlap, hyp_units, ref_units);
}

}  // namespace gabs
