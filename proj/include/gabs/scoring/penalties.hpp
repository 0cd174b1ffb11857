#ifndef GABS_SCORING_PENALTIES_HPP
#define GABS_SCORING_PENALTIES_HPP

#include <optional>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "gabs/core/types.hpp"

namespace gabs {

// Terminal coverage penalty sum_i log min(coverage_i, theta_i). The threshold
// defaults to 1 for every token; a per-token vector (e.g. the global
// attention values) may replace it.
struct PenaltyGnmt {
  std::optional<std::vector<double>> thresholds;
};

// Terminal coverage penalty sum_i log min(coverage_i, beta_prime).
struct PenaltyTruncated {
  double beta_prime = 1.0;
};

// Terminal penalty n - sum_i max(coverage_i, 1).
struct PenaltyBottomUp {};

// Step-wise penalty -sum_i min(row_i, prior_i).
struct PenaltyStepwiseSee {};

// Step-wise penalty 1 - sum_i min(row_i, prior_i).
struct PenaltyStepwiseLi {};

using PenaltyKind =
    std::variant<PenaltyGnmt, PenaltyTruncated, PenaltyBottomUp, PenaltyStepwiseSee, PenaltyStepwiseLi>;

// Terminal form; throws WrongInputShapeError for the step-wise kinds.
double baseline_penalty(const PenaltyKind& kind, const AttentionLedger& terminal);

// Step-wise form (current attention row plus the ledger accumulated before
// it); throws WrongInputShapeError for the terminal kinds.
double baseline_penalty(const PenaltyKind& kind, std::span<const double> row,
                        const AttentionLedger& previous);

// Repetition overlay applied to a logit vector: logits of already generated
// tokens are divided by theta when positive and multiplied by theta when
// negative. theta = 1 is the identity.
std::vector<double> repetition_penalty(std::span<const double> logits,
                                       const std::unordered_set<TokenId>& generated, double theta);

}  // namespace gabs

#endif  // GABS_SCORING_PENALTIES_HPP
