#include "gabs/search/beam.hpp"
#include "gabs/search/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gabs/scoring/penalties.hpp"
#include "gabs/scoring/scoring.hpp"

namespace gabs {

namespace {

double log_sum_exp(std::span<const double> v) {
  double m = v.front();
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Everything one model step contributes that is shared by all continuations
// of the same beam: the (possibly repetition-adjusted) step output, the
// updated ledger, and the scorer addend applied on top of each token logp.
struct StepEval {
  StepOutput out;
  AttentionLedger ledger;
  double att = 1.0;
  double reward = 0.0;
  double coverage = 0.0;
  double base = 0.0;
};

struct Candidate {
  int parent = 0;
  TokenId token = 0;
  double score = 0.0;
};

StepEval evaluate_step(const Model& model, const SourceDocument& source, const Hypothesis& beam,
                       const GlobalAttention& g_t, double z, int t, const ScorerConfig& config,
                       DecodeStats& stats, int& attention_evals) {
  StepEval ev;
  ev.out = model.step(source, beam.tokens);
  ++stats.model_calls;
  if (config.repetition_theta && *config.repetition_theta != 1.0) {
    const std::unordered_set<TokenId> generated(beam.tokens.begin() + 1, beam.tokens.end());
    std::vector<double> adjusted =
        repetition_penalty(ev.out.logprobs, generated, *config.repetition_theta);
    const double lse = log_sum_exp(adjusted);
    for (double& x : adjusted) x -= lse;
    ev.out.logprobs = std::move(adjusted);
  }
  ev.ledger = accumulate_attention(beam.ledger, ev.out.attention);
  ev.att = attention_score(ev.ledger, g_t);
  ++attention_evals;
  ev.reward = step_length_reward(t, z);
  switch (config.scorer) {
    case ScorerKind::Global:
      ev.base = joint_step_update(0.0, 0.0, ev.att, ev.reward, config.beta, config.gamma,
                                  config.attention_floor);
      break;
    case ScorerKind::CoverageStep:
      ev.coverage = baseline_penalty(PenaltyStepwiseLi{}, ev.out.attention, beam.ledger);
      ev.base = config.beta * ev.coverage;
      break;
    default:
      ev.base = 0.0;
      break;
  }
  return ev;
}

Hypothesis make_child(const Hypothesis& parent, const StepEval& ev, TokenId token) {
  Hypothesis h = parent;
  h.tokens.push_back(token);
  const double logp = ev.out.logprobs[token];
  h.logprob += logp;
  h.joint += logp;
  h.joint += ev.base;
  h.ledger = ev.ledger;
  h.steps.push_back({logp, ev.att, ev.reward, ev.coverage});
  return h;
}

double final_score_of(const Hypothesis& h, const ScorerConfig& config,
                      const GlobalAttention& whole) {
  const int length = h.generated_length();
  switch (config.scorer) {
    case ScorerKind::Global:
      return final_hypothesis_score(h);
    case ScorerKind::Beam:
      return length_normalized_score(h.logprob, length, config.a);
    case ScorerKind::CoverageGnmt: {
      PenaltyGnmt penalty;
      if (config.coverage_g_thresholds) penalty.thresholds = whole.values;
      return length_normalized_score(h.logprob, length, config.a) +
             config.beta * baseline_penalty(PenaltyKind{penalty}, h.ledger);
    }
    case ScorerKind::CoverageTrunc:
      return length_normalized_score(h.logprob, length, config.a) +
             baseline_penalty(PenaltyKind{PenaltyTruncated{config.beta}}, h.ledger);
    case ScorerKind::BottomUp:
      return length_normalized_score(h.logprob, length, config.a) +
             config.beta * baseline_penalty(PenaltyKind{PenaltyBottomUp{}}, h.ledger);
    case ScorerKind::CoverageStep:
      return length_normalized_score(h.joint, length, config.a);
  }
  throw InvalidInputError("unknown scorer kind");
}

bool pool_order(const ScoredHypothesis& x, const ScoredHypothesis& y) {
  if (x.final_score != y.final_score) return x.final_score > y.final_score;
  if (x.hyp.forced != y.hyp.forced) return !x.hyp.forced;
  return x.hyp.tokens < y.hyp.tokens;
}

std::vector<Candidate> rank_candidates(std::span<const Hypothesis> frontier,
                                       std::span<const StepEval> evals, int vocab_size,
                                       TokenId eos, std::optional<int> min_length, int t) {
  std::vector<Candidate> candidates;
  candidates.reserve(frontier.size() * static_cast<std::size_t>(vocab_size));
  const bool suppress_eos = min_length && t < *min_length;
  for (std::size_t k = 0; k < frontier.size(); ++k) {
    for (TokenId v = 0; v < vocab_size; ++v) {
      if (suppress_eos && v == eos) continue;
      double score = frontier[k].joint + evals[k].out.logprobs[v];
      score += evals[k].base;
      candidates.push_back({static_cast<int>(k), v, score});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.parent != b.parent) return a.parent < b.parent;
    return a.token < b.token;
  });
  return candidates;
}

DecodeResult run_engine(const Model& model, const SourceDocument& source,
                        const BlockSchedule& schedule, const ScorerConfig& config) {
  config.validate();
  source.validate();
  schedule.validate();
  for (const auto& segment : schedule.segments) {
    if (segment.attention.size() != source.size())
      throw LengthMismatchError("global attention length does not match the source");
  }
  const TokenId eos = model.eos_token();
  if (eos < 0 || eos >= model.vocab_size())
    throw NoHypothesisError("vocabulary lacks an end-of-sequence token");

  const double z = schedule.whole().optimal_length;
  if (z <= 0.0) throw InvalidInputError("global attention must carry positive total mass");
  int max_steps = config.max_steps ? *config.max_steps
                                   : static_cast<int>(std::ceil(3.0 * z));
  if (config.max_length) max_steps = std::min(max_steps, *config.max_length - 1);
  max_steps = std::max(1, max_steps);

  const std::size_t beam_width = static_cast<std::size_t>(config.beam_size);
  Hypothesis root;
  root.tokens = {model.start_token()};
  root.ledger = AttentionLedger::zeros(source.size());
  std::vector<Hypothesis> frontier(beam_width, root);
  // The initial slots hold identical copies of the start hypothesis; after
  // the first selection every frontier sequence is distinct.
  bool frontier_has_duplicates = beam_width > 1;

  DecodeResult result;
  if (config.record_trace) result.trace.emplace();
  std::vector<ScoredHypothesis>& pool = result.pool;
  bool pool_full = false;

  int t = 1;
  for (; t <= max_steps; ++t) {
    const GlobalAttention& g_t = schedule.for_step(t);
    std::vector<StepEval> evals;
    evals.reserve(frontier.size());
    int attention_evals = 0;
    for (const Hypothesis& beam : frontier) {
      evals.push_back(
          evaluate_step(model, source, beam, g_t, z, t, config, result.stats, attention_evals));
    }
    result.stats.attention_evals_per_step.push_back(attention_evals);

    const std::vector<Candidate> candidates =
        rank_candidates(frontier, evals, model.vocab_size(), eos, config.min_length, t);

    std::vector<Hypothesis> next;
    next.reserve(beam_width);
    std::unordered_set<TokenId> seen;
    std::size_t selected = 0;
    for (const Candidate& cand : candidates) {
      if (frontier_has_duplicates && !seen.insert(cand.token).second) continue;
      const bool is_eos = cand.token == eos;
      if (selected < beam_width) {
        ++selected;
        if (is_eos) {
          Hypothesis h = make_child(frontier[cand.parent], evals[cand.parent], cand.token);
          h.finished = true;
          pool.push_back({std::move(h), 0.0});
          pool.back().final_score = final_score_of(pool.back().hyp, config, schedule.whole());
          if (pool.size() == beam_width) {
            pool_full = true;
            break;
          }
        } else {
          next.push_back(make_child(frontier[cand.parent], evals[cand.parent], cand.token));
        }
      } else {
        if (next.size() >= beam_width) break;
        if (!is_eos) next.push_back(make_child(frontier[cand.parent], evals[cand.parent], cand.token));
      }
    }
    if (pool_full) break;
    frontier = std::move(next);
    frontier_has_duplicates = false;
    if (result.trace) {
      result.trace->push_back({t, frontier, pool.size()});
    }
    if (frontier.empty()) break;
  }

  if (!pool_full && !frontier.empty() && t > max_steps) {
    // Survivors at the cap are finished by appending end-of-sequence, scored
    // as a regular step, and flagged.
    const int force_step = max_steps + 1;
    const GlobalAttention& g_t = schedule.for_step(force_step);
    std::vector<ScoredHypothesis> forced;
    forced.reserve(frontier.size());
    int attention_evals = 0;
    for (const Hypothesis& beam : frontier) {
      const StepEval ev = evaluate_step(model, source, beam, g_t, z, force_step, config,
                                        result.stats, attention_evals);
      Hypothesis h = make_child(beam, ev, eos);
      h.finished = true;
      h.forced = true;
      const double score = final_score_of(h, config, schedule.whole());
      forced.push_back({std::move(h), score});
    }
    result.stats.attention_evals_per_step.push_back(attention_evals);
    std::sort(forced.begin(), forced.end(), pool_order);
    for (auto& f : forced) {
      if (pool.size() >= beam_width) break;
      pool.push_back(std::move(f));
    }
  }

  if (pool.empty()) throw NoHypothesisError("decoding produced no finished hypothesis");
  std::sort(pool.begin(), pool.end(), pool_order);
  return result;
}

}  // namespace

const ScoredHypothesis& DecodeResult::best() const {
  if (pool.empty()) throw NoHypothesisError("empty hypothesis pool");
  return pool.front();
}

const ScoredHypothesis* DecodeResult::best_natural() const {
  for (const ScoredHypothesis& s : pool) {
    if (!s.hyp.forced) return &s;
  }
  return nullptr;
}

const GlobalAttention& BlockSchedule::for_step(int t) const {
  if (t < 1) throw InvalidScheduleError("step index must be >= 1");
  for (const Segment& s : segments) {
    if (t >= s.first_step && t <= s.last_step) return s.attention;
  }
  throw InvalidScheduleError("schedule does not cover step " + std::to_string(t));
}

void BlockSchedule::validate() const {
  if (segments.empty()) throw InvalidScheduleError("schedule has no segments");
  if (segments.front().first_step != 1) throw InvalidScheduleError("schedule must start at step 1");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].first_step > segments[i].last_step)
      throw InvalidScheduleError("schedule segment range is inverted");
    if (i + 1 < segments.size() && segments[i + 1].first_step != segments[i].last_step + 1)
      throw InvalidScheduleError("schedule segments must be contiguous");
  }
  if (segments.back().last_step != std::numeric_limits<int>::max())
    throw InvalidScheduleError("final schedule segment must be open-ended");
}

BlockSchedule BlockSchedule::single(GlobalAttention g) {
  BlockSchedule schedule;
  schedule.segments.push_back({1, std::numeric_limits<int>::max(), std::move(g)});
  return schedule;
}

BlockSchedule oracle_block_schedule(const Model& model, const SourceDocument& source,
                                    std::span<const TokenId> reference, int block_length) {
  if (block_length < 1) throw InvalidInputError("block length must be >= 1");
  if (reference.empty() || reference.back() != model.eos_token())
    throw InvalidInputError("reference must end with the end-of-sequence token");
  const int target_len = static_cast<int>(reference.size());
  BlockSchedule schedule;
  int first = 1;
  for (int boundary = block_length; boundary < target_len; boundary += block_length) {
    schedule.segments.push_back(
        {first, boundary,
         accumulate_target_attention(model, source, reference.subspan(0, boundary))});
    first = boundary + 1;
  }
  schedule.segments.push_back({first, std::numeric_limits<int>::max(),
                               teacher_forced_global_attention(model, source, reference)});
  return schedule;
}

DecodeResult beam_search(const Model& model, const SourceDocument& source,
                         const GlobalAttention& g, const ScorerConfig& config) {
  return run_engine(model, source, BlockSchedule::single(g), config);
}

DecodeResult blocked_decode(const Model& model, const SourceDocument& source,
                            const BlockSchedule& schedule, const ScorerConfig& config) {
  return run_engine(model, source, schedule, config);
}

std::vector<Hypothesis> expand_and_select(std::span<const Hypothesis> beams,
                                          std::span<const StepOutput> step_outputs,
                                          const GlobalAttention& g, int step,
                                          const ScorerConfig& config) {
  if (beams.empty()) throw InvalidInputError("expansion needs at least one beam");
  if (beams.size() != step_outputs.size())
    throw LengthMismatchError("one step output per beam is required");
  config.validate();

  std::vector<StepEval> step_evals;
  step_evals.reserve(beams.size());
  const double z = g.optimal_length;
  for (std::size_t k = 0; k < beams.size(); ++k) {
    StepEval ev;
    ev.out = step_outputs[k];
    ev.ledger = accumulate_attention(beams[k].ledger, ev.out.attention);
    ev.att = attention_score(ev.ledger, g);
    ev.reward = z > 0.0 ? step_length_reward(step, z) : 0.0;
    switch (config.scorer) {
      case ScorerKind::Global:
        ev.base = joint_step_update(0.0, 0.0, ev.att, ev.reward, config.beta, config.gamma,
                                    config.attention_floor);
        break;
      case ScorerKind::CoverageStep:
        ev.coverage = baseline_penalty(PenaltyStepwiseLi{}, ev.out.attention, beams[k].ledger);
        ev.base = config.beta * ev.coverage;
        break;
      default:
        break;
    }
    step_evals.push_back(std::move(ev));
  }

  const int vocab = static_cast<int>(step_outputs.front().logprobs.size());
  std::vector<Candidate> candidates;
  candidates.reserve(beams.size() * static_cast<std::size_t>(vocab));
  for (std::size_t k = 0; k < beams.size(); ++k) {
    for (TokenId v = 0; v < vocab; ++v) {
      double score = beams[k].joint + step_evals[k].out.logprobs[v];
      score += step_evals[k].base;
      candidates.push_back({static_cast<int>(k), v, score});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.parent != b.parent) return a.parent < b.parent;
    return a.token < b.token;
  });

  std::vector<Hypothesis> selected;
  for (const Candidate& cand : candidates) {
    if (selected.size() >= static_cast<std::size_t>(config.beam_size)) break;
    bool duplicate = false;
    for (const Hypothesis& h : selected) {
      if (h.tokens.back() == cand.token &&
          std::equal(h.tokens.begin(), h.tokens.end() - 1, beams[cand.parent].tokens.begin(),
                     beams[cand.parent].tokens.end())) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    selected.push_back(make_child(beams[cand.parent], step_evals[cand.parent], cand.token));
  }
  return selected;
}

ScoredHypothesis score_sequence(const Model& model, const SourceDocument& source,
                                std::span<const TokenId> generated, const GlobalAttention& g,
                                const ScorerConfig& config) {
  config.validate();
  if (generated.empty() || generated.back() != model.eos_token())
    throw InvalidInputError("sequence must end with the end-of-sequence token");
  const double z = g.optimal_length;
  if (z <= 0.0) throw InvalidInputError("global attention must carry positive total mass");
  DecodeStats scratch;
  int evals = 0;
  Hypothesis h;
  h.tokens = {model.start_token()};
  h.ledger = AttentionLedger::zeros(source.size());
  for (std::size_t t = 0; t < generated.size(); ++t) {
    const StepEval ev = evaluate_step(model, source, h, g, z, static_cast<int>(t) + 1, config,
                                      scratch, evals);
    h = make_child(h, ev, generated[t]);
  }
  h.finished = true;
  return {h, final_score_of(h, config, g)};
}

DecodeResult exhaustive_oracle(const Model& model, const SourceDocument& source,
                               const GlobalAttention& g, const ScorerConfig& config, int l_max) {
  config.validate();
  source.validate();
  if (l_max < 1) throw InvalidInputError("l_max must be >= 1");
  if (g.size() != source.size())
    throw LengthMismatchError("global attention length does not match the source");
  const double z = g.optimal_length;
  if (z <= 0.0) throw InvalidInputError("global attention must carry positive total mass");
  const TokenId eos = model.eos_token();
  if (eos < 0 || eos >= model.vocab_size())
    throw NoHypothesisError("vocabulary lacks an end-of-sequence token");

  const double space =
      std::pow(static_cast<double>(model.vocab_size() - 1), static_cast<double>(l_max));
  if (space > 1e6)
    throw SearchSpaceTooLargeError("(|V|-1)^l_max exceeds the enumeration guard");

  DecodeResult result;
  const BlockSchedule schedule = BlockSchedule::single(g);
  const std::size_t keep = static_cast<std::size_t>(config.beam_size);

  auto offer = [&](Hypothesis h) {
    ScoredHypothesis scored{std::move(h), 0.0};
    scored.final_score = final_score_of(scored.hyp, config, g);
    auto it = std::lower_bound(result.pool.begin(), result.pool.end(), scored, pool_order);
    if (it == result.pool.end() && result.pool.size() >= keep) return;
    result.pool.insert(it, std::move(scored));
    if (result.pool.size() > keep) result.pool.pop_back();
  };

  int attention_evals = 0;
  auto dfs = [&](auto&& self, const Hypothesis& node, int depth) -> void {
    const StepEval ev = evaluate_step(model, source, node, g, z, depth + 1, config, result.stats,
                                      attention_evals);
    Hypothesis terminated = make_child(node, ev, eos);
    terminated.finished = true;
    offer(std::move(terminated));
    ++result.stats.enumerated;
    if (depth + 1 >= l_max) return;
    for (TokenId v = 0; v < model.vocab_size(); ++v) {
      if (v == eos) continue;
      self(self, make_child(node, ev, v), depth + 1);
    }
  };

  Hypothesis root;
  root.tokens = {model.start_token()};
  root.ledger = AttentionLedger::zeros(source.size());
  dfs(dfs, root, 0);

  if (result.pool.empty()) throw NoHypothesisError("enumeration produced no hypothesis");
  return result;
}

}  // namespace gabs
