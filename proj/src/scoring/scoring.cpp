#include "gabs/scoring/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gabs {

double attention_score(const AttentionLedger& ledger, const GlobalAttention& g) {
  if (ledger.local.size() != g.values.size())
    throw LengthMismatchError("ledger and global attention lengths differ");
  if (ledger.total <= 0.0) throw EmptyLedgerError("attention score needs zeta > 0");
  double kept = 0.0;
  for (std::size_t i = 0; i < ledger.local.size(); ++i)
    kept += std::min(ledger.local[i], g.values[i]);
  return kept / ledger.total;
}

double step_length_reward(int t, double optimal_length) {
  if (optimal_length <= 0.0) throw NonPositiveZError("optimal length must be > 0");
  if (t < 1) throw InvalidInputError("step index must be >= 1");
  const double target = optimal_length / std::numbers::sqrt2 + 0.5;
  return -std::abs(static_cast<double>(t) - target) / optimal_length;
}

double joint_step_update(double joint_prev, double logp, double attention, double reward,
                         double beta, double gamma, double attention_floor) {
  return joint_prev + logp + beta * (std::log(std::max(attention, attention_floor)) + gamma * reward);
}

double final_hypothesis_score(const Hypothesis& h) {
  if (!h.finished) throw UnfinishedError("final score requires a finished hypothesis");
  const int length = h.generated_length();
  if (length < 1) throw ZeroLengthError("final score requires at least one generated token");
  return h.joint / static_cast<double>(length);
}

double length_normalized_score(double logprob, int length, double a) {
  if (length < 1) throw ZeroLengthError("length normalization requires length >= 1");
  return logprob / std::pow(static_cast<double>(length), a);
}

double recompute_joint(const Hypothesis& h, const ScorerConfig& config) {
  double joint = 0.0;
  for (const StepScore& s : h.steps) {
    switch (config.scorer) {
      case ScorerKind::Global:
        joint = joint_step_update(joint, s.logp, s.attention, s.reward, config.beta, config.gamma,
                                  config.attention_floor);
        break;
      case ScorerKind::CoverageStep:
        joint += s.logp + config.beta * s.coverage;
        break;
      default:
        joint += s.logp;
        break;
    }
  }
  return joint;
}

}  // namespace gabs
