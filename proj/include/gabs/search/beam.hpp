#ifndef GABS_SEARCH_BEAM_HPP
#define GABS_SEARCH_BEAM_HPP

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gabs/model/model.hpp"

namespace gabs {

struct BeamSnapshot {
  int step = 0;
  std::vector<Hypothesis> frontier;
  std::size_t pool_size = 0;
};

struct DecodeStats {
  // attention_score calls made while scoring each step (the force-finish
  // step, when it happens, appends one more entry).
  std::vector<int> attention_evals_per_step;
  long model_calls = 0;
  long enumerated = 0;  // terminated sequences visited (exhaustive search only)
};

struct ScoredHypothesis {
  Hypothesis hyp;
  double final_score = 0.0;
};

struct DecodeResult {
  // Finished hypotheses, at most beam_size of them, sorted by final score
  // (ties: naturally finished before forced, then lexicographic tokens).
  std::vector<ScoredHypothesis> pool;
  std::optional<std::vector<BeamSnapshot>> trace;
  DecodeStats stats;

  const ScoredHypothesis& best() const;
  // Best hypothesis that finished by emitting end-of-sequence itself;
  // nullptr when every pool entry was force-finished.
  const ScoredHypothesis* best_natural() const;
};

// Ordered per-step-range global attention distributions. Ranges are
// contiguous from step 1 and the final range is open-ended and holds the
// whole-sequence distribution.
struct BlockSchedule {
  struct Segment {
    int first_step = 1;
    int last_step = std::numeric_limits<int>::max();  // inclusive
    GlobalAttention attention;
  };
  std::vector<Segment> segments;

  const GlobalAttention& for_step(int t) const;
  const GlobalAttention& whole() const { return segments.back().attention; }
  void validate() const;

  // Wraps a single distribution as a one-segment schedule.
  static BlockSchedule single(GlobalAttention g);
};

// Builds the schedule used by blocked decoding from cumulative per-segment
// distributions extracted from the reference under teacher forcing: segment
// boundaries fall at multiples of block_length below Z, and the final
// open-ended segment holds the whole-reference distribution.
BlockSchedule oracle_block_schedule(const Model& model, const SourceDocument& source,
                                    std::span<const TokenId> reference, int block_length);

// Breadth-limited search over the model vocabulary keeping the beam_size
// highest-scoring unfinished continuations per step. Continuations that emit
// end-of-sequence within the per-step top-K selection move to the finished
// pool. Decoding stops when the pool holds beam_size hypotheses or at the
// step cap, where survivors are force-finished (end-of-sequence appended and
// scored as a regular step) and flagged.
DecodeResult beam_search(const Model& model, const SourceDocument& source,
                         const GlobalAttention& g, const ScorerConfig& config);

// Same search with the attention score evaluated against the schedule's
// distribution for the current step; the ledger itself is never reset.
DecodeResult blocked_decode(const Model& model, const SourceDocument& source,
                            const BlockSchedule& schedule, const ScorerConfig& config);

// Top-K continuation selection (the per-step primitive): ranks all
// |beams| x |V| continuations by their updated joint score with
// deterministic tie-breaks (score desc, parent index asc, token id asc),
// drops duplicate token sequences, and returns up to beam_size of them.
std::vector<Hypothesis> expand_and_select(std::span<const Hypothesis> beams,
                                          std::span<const StepOutput> step_outputs,
                                          const GlobalAttention& g, int step,
                                          const ScorerConfig& config);

// Replays a fixed generated sequence (end-of-sequence last) through the
// per-step scoring pipeline and returns the fully scored hypothesis.
ScoredHypothesis score_sequence(const Model& model, const SourceDocument& source,
                                std::span<const TokenId> generated, const GlobalAttention& g,
                                const ScorerConfig& config);

}  // namespace gabs

#endif  // GABS_SEARCH_BEAM_HPP
