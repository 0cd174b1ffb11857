#ifndef GABS_CORE_TYPES_HPP
#define GABS_CORE_TYPES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gabs/core/errors.hpp"

namespace gabs {

// Vocabulary index. Ids are dense in [0, vocab_size); one id is designated the
// end-of-sequence token and doubles as the decoder start token (it is never
// produced by search, only consumed as the fixed first decoder input).
using TokenId = int;

// Tolerance for validating externally supplied distributions.
inline constexpr double kDistributionTolerance = 1e-6;
// Tolerance for internal accumulation identities (zeta = t, Z = sum g, ...).
inline constexpr double kAccumulationTolerance = 1e-9;

struct SourceDocument {
  std::vector<TokenId> tokens;
  // Optional per-token feature vectors of identical dimension; the input to
  // the attention predictor.
  std::optional<std::vector<std::vector<double>>> features;

  std::size_t size() const { return tokens.size(); }
  void validate() const;

  bool operator==(const SourceDocument&) const = default;
};

// Per-source-token attention totals accumulated over a full target sequence,
// together with their sum Z (the optimal generation length).
struct GlobalAttention {
  std::vector<double> values;
  double optimal_length = 0.0;

  static GlobalAttention from_values(std::vector<double> v);
  std::size_t size() const { return values.size(); }

  bool operator==(const GlobalAttention&) const = default;
};

// Running per-source-token attention totals for one partial hypothesis. Each
// generated token contributes one normalized row, so total == #rows exactly.
struct AttentionLedger {
  std::vector<double> local;
  double total = 0.0;

  static AttentionLedger zeros(std::size_t n) { return {std::vector<double>(n, 0.0), 0.0}; }
  // Builds a ledger from raw per-token totals; total is their plain sum.
  static AttentionLedger from_local(std::vector<double> l);
  std::size_t size() const { return local.size(); }

  bool operator==(const AttentionLedger&) const = default;
};

// One scored generation step: log-probability of the chosen token, attention
// score of the ledger after that token's row, step length reward, and the
// step-wise coverage term (used only by the step-wise coverage scorer).
struct StepScore {
  double logp = 0.0;
  double attention = 1.0;
  double reward = 0.0;
  double coverage = 0.0;

  bool operator==(const StepScore&) const = default;
};

struct Hypothesis {
  // Token sequence beginning with the decoder start token.
  std::vector<TokenId> tokens;
  double logprob = 0.0;  // accumulated sum of log p
  double joint = 0.0;    // accumulated joint score J
  AttentionLedger ledger;
  std::vector<StepScore> steps;
  bool finished = false;  // ends with end-of-sequence
  bool forced = false;    // end-of-sequence appended at the step cap

  int generated_length() const { return static_cast<int>(tokens.size()) - 1; }

  bool operator==(const Hypothesis&) const = default;
};

enum class ScorerKind {
  Beam,           // log-probability search, final score normalized by length^a
  Global,         // joint score with attention score and length reward
  CoverageGnmt,   // beam search + terminal sum log min(coverage, threshold)
  CoverageTrunc,  // beam search + terminal sum log min(coverage, beta)
  CoverageStep,   // step-wise 1 - sum min(row, prior coverage) added to J
  BottomUp,       // beam search + terminal n - sum max(coverage, 1)
};

std::string to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(const std::string& name);

struct ScorerConfig {
  ScorerKind scorer = ScorerKind::Global;
  double beta = 12.0;
  double gamma = 1.0;
  // Length penalty exponent; applies to the beam/coverage scorers only.
  double a = 1.0;
  int beam_size = 4;
  std::optional<double> repetition_theta;  // >= 1 when present
  std::optional<int> block_length;
  // Hard step cap. When absent the engine uses ceil(3 * Z).
  std::optional<int> max_steps;
  // Optional hard length constraints for the beam baseline.
  std::optional<int> min_length;
  std::optional<int> max_length;
  // Floor applied to the attention score before taking its log.
  double attention_floor = 1e-12;
  std::uint64_t seed = 0;
  bool record_trace = false;
  // CoverageGnmt: use per-token global attention thresholds instead of 1.
  bool coverage_g_thresholds = false;

  void validate() const;

  bool operator==(const ScorerConfig&) const = default;
};

}  // namespace gabs

#endif  // GABS_CORE_TYPES_HPP
