#ifndef GABS_SCORING_SCORING_HPP
#define GABS_SCORING_SCORING_HPP

#include <span>

#include "gabs/core/types.hpp"

namespace gabs {

// Fraction of the assigned local attention that stays within the global
// protocol: sum_i min(l_i, g_i) / zeta. Equals 1 - Delta/zeta where Delta is
// the total overshoot over the exceed set, and lies in [0, 1].
double attention_score(const AttentionLedger& ledger, const GlobalAttention& g);

// Step-wise length reward -|t - Z/sqrt(2) - 0.5| / Z (always <= 0). Its
// normalized cumulative sum over t = 1..j peaks at j ~= Z.
double step_length_reward(int t, double optimal_length);

// One accumulation step of the joint score:
//   J = J_prev + logp + beta * (log max(A, floor) + gamma * R)
double joint_step_update(double joint_prev, double logp, double attention, double reward,
                         double beta, double gamma, double attention_floor);

// Final selection score of a finished hypothesis: J / generated length.
double final_hypothesis_score(const Hypothesis& h);

// Baseline final score: logprob / length^a.
double length_normalized_score(double logprob, int length, double a);

// Rebuilds the joint score of a hypothesis from its per-step records under
// the given configuration. Matches the accumulated value within 1e-9.
double recompute_joint(const Hypothesis& h, const ScorerConfig& config);

}  // namespace gabs

#endif  // GABS_SCORING_SCORING_HPP
