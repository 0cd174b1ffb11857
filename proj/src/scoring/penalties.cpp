#include "gabs/scoring/penalties.hpp"

#include <algorithm>
#include <cmath>

namespace gabs {

namespace {

double overlap_with_prior(std::span<const double> row, const AttentionLedger& previous) {
  if (row.size() != previous.local.size())
    throw LengthMismatchError("attention row and ledger lengths differ");
  double overlap = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) overlap += std::min(row[i], previous.local[i]);
  return overlap;
}

}  // namespace

double baseline_penalty(const PenaltyKind& kind, const AttentionLedger& terminal) {
  const auto& coverage = terminal.local;
  if (const auto* gnmt = std::get_if<PenaltyGnmt>(&kind)) {
    if (gnmt->thresholds && gnmt->thresholds->size() != coverage.size())
      throw LengthMismatchError("threshold vector length does not match the source");
    double sum = 0.0;
    for (std::size_t i = 0; i < coverage.size(); ++i) {
      const double theta = gnmt->thresholds ? (*gnmt->thresholds)[i] : 1.0;
      sum += std::log(std::min(coverage[i], theta));
    }
    return sum;
  }
  if (const auto* trunc = std::get_if<PenaltyTruncated>(&kind)) {
    double sum = 0.0;
    for (double c : coverage) sum += std::log(std::min(c, trunc->beta_prime));
    return sum;
  }
  if (std::holds_alternative<PenaltyBottomUp>(kind)) {
    double sum = 0.0;
    for (double c : coverage) sum += std::max(c, 1.0);
    return static_cast<double>(coverage.size()) - sum;
  }
  throw WrongInputShapeError("step-wise penalty kinds need a row and a prior ledger");
}

double baseline_penalty(const PenaltyKind& kind, std::span<const double> row,
                        const AttentionLedger& previous) {
  if (std::holds_alternative<PenaltyStepwiseSee>(kind)) return -overlap_with_prior(row, previous);
  if (std::holds_alternative<PenaltyStepwiseLi>(kind)) return 1.0 - overlap_with_prior(row, previous);
  throw WrongInputShapeError("terminal penalty kinds take a terminal ledger");
}

std::vector<double> repetition_penalty(std::span<const double> logits,
                                       const std::unordered_set<TokenId>& generated, double theta) {
  if (theta < 1.0) throw InvalidInputError("repetition theta must be >= 1");
  std::vector<double> out(logits.begin(), logits.end());
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (!generated.count(static_cast<TokenId>(v))) continue;
    out[v] = out[v] > 0.0 ? out[v] / theta : out[v] * theta;
  }
  return out;
}

}  // namespace gabs
