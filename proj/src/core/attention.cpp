#include "gabs/core/attention.hpp"

#include <cmath>

namespace gabs {

void SourceDocument::validate() const {
  if (tokens.empty()) throw InvalidInputError("source document must contain at least one token");
  for (TokenId id : tokens) {
    if (id < 0) throw InvalidInputError("source token ids must be non-negative");
  }
  if (features) {
    if (features->size() != tokens.size())
      throw LengthMismatchError("feature rows must match source length");
    if (features->empty()) return;
    const std::size_t d = features->front().size();
    for (const auto& row : *features) {
      if (row.size() != d) throw DimensionMismatchError("feature vectors must share one dimension");
    }
  }
}

GlobalAttention GlobalAttention::from_values(std::vector<double> v) {
  double z = 0.0;
  for (double x : v) {
    if (x < 0.0) throw NegativeEntryError("global attention values must be non-negative");
    z += x;
  }
  return {std::move(v), z};
}

AttentionLedger AttentionLedger::from_local(std::vector<double> l) {
  double total = 0.0;
  for (double x : l) {
    if (x < 0.0) throw NegativeEntryError("local attention values must be non-negative");
    total += x;
  }
  return {std::move(l), total};
}

void validate_distribution(std::span<const double> row) {
  if (row.empty()) throw InvalidInputError("distribution row is empty");
  double sum = 0.0;
  for (double v : row) {
    if (v < 0.0) throw NegativeEntryError("distribution entry is negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) throw NotNormalizedError(sum);
}

AttentionLedger accumulate_attention(const AttentionLedger& ledger, std::span<const double> row) {
  validate_distribution(row);
  if (row.size() != ledger.local.size())
    throw LengthMismatchError("attention row length does not match ledger length");
  AttentionLedger out = ledger;
  for (std::size_t i = 0; i < row.size(); ++i) out.local[i] += row[i];
  out.total = ledger.total + 1.0;
  return out;
}

std::string to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::Beam: return "beam";
    case ScorerKind::Global: return "global";
    case ScorerKind::CoverageGnmt: return "coverage-gnmt";
    case ScorerKind::CoverageTrunc: return "coverage-trunc";
    case ScorerKind::CoverageStep: return "coverage-step";
    case ScorerKind::BottomUp: return "bottom-up";
  }
  throw InvalidInputError("unknown scorer kind");
}

ScorerKind scorer_kind_from_string(const std::string& name) {
  if (name == "beam") return ScorerKind::Beam;
  if (name == "global") return ScorerKind::Global;
  if (name == "coverage-gnmt") return ScorerKind::CoverageGnmt;
  if (name == "coverage-trunc") return ScorerKind::CoverageTrunc;
  if (name == "coverage-step") return ScorerKind::CoverageStep;
  if (name == "bottom-up") return ScorerKind::BottomUp;
  throw InvalidInputError("unknown scorer kind: " + name);
}

void ScorerConfig::validate() const {
  if (beam_size < 1) throw InvalidInputError("beam size must be >= 1");
  if (beta < 0.0) throw InvalidInputError("beta must be >= 0");
  if (gamma < 0.0) throw InvalidInputError("gamma must be >= 0");
  if (attention_floor <= 0.0) throw InvalidInputError("attention floor must be > 0");
  if (repetition_theta && *repetition_theta < 1.0)
    throw InvalidInputError("repetition theta must be >= 1");
  if (block_length && *block_length < 1) throw InvalidInputError("block length must be >= 1");
  if (max_steps && *max_steps < 1) throw InvalidInputError("max steps must be >= 1");
  if (min_length && *min_length < 1) throw InvalidInputError("min length must be >= 1");
  if (max_length && *max_length < 1) throw InvalidInputError("max length must be >= 1");
}

}  // namespace gabs
