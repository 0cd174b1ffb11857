#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "gabs/io/records.hpp"
#include "gabs/model/synthetic.hpp"
#include "gabs/scoring/scoring.hpp"
#include "gabs/search/beam.hpp"
#include "gabs/search/oracle.hpp"

using namespace gabs;

namespace {

ScorerConfig global_config(double beta, double gamma, int beam_size) {
  ScorerConfig config;
  config.scorer = ScorerKind::Global;
  config.beta = beta;
  config.gamma = gamma;
  config.beam_size = beam_size;
  return config;
}

// Single dominant path (a, b, eos) regardless of beam size.
TableModel one_path_model() {
  const std::vector<double> att{0.5, 0.5};
  TableModel::EntryMap entries;
  auto entry = [&](std::vector<double> p) {
    StepOutput out;
    for (double x : p) out.logprobs.push_back(std::log(x));
    out.attention = att;
    return out;
  };
  entries[{}] = entry({0.98, 0.01, 0.01});
  entries[{0}] = entry({0.01, 0.98, 0.01});
  return TableModel(3, 2, std::move(entries), entry({0.01, 0.01, 0.98}));
}

const GlobalAttention kOnes2 = GlobalAttention::from_values({1.0, 1.0});

}  // namespace

TEST_CASE("greedy decode follows the argmax path on the fixture") {
  const TableModel model = testing::tm1();
  const SourceDocument src = testing::src2();
  ScorerConfig config = global_config(0.0, 1.0, 1);
  config.max_steps = 10;
  const DecodeResult result =
      beam_search(model, src, GlobalAttention::from_values({1.4, 1.6}), config);
  const std::vector<TokenId> expected{2, 0, 1, 2};
  CHECK(result.best().hyp.tokens == expected);
  CHECK(result.best().hyp.logprob == doctest::Approx(-1.2447949).epsilon(1e-6));
  CHECK(result.best().final_score == doctest::Approx(-0.4149316).epsilon(1e-6));
  CHECK(result.best().hyp.finished);
  CHECK_FALSE(result.best().hyp.forced);
}

TEST_CASE("a deterministic one-path model yields the same hypothesis for any K") {
  const TableModel model = one_path_model();
  const SourceDocument src = testing::src2();
  const std::vector<TokenId> expected{2, 0, 1, 2};
  for (int k : {1, 2, 4}) {
    const DecodeResult result = beam_search(model, src, kOnes2, global_config(0.0, 1.0, k));
    CHECK(result.best().hyp.tokens == expected);
  }
}

TEST_CASE("expand_and_select picks the top continuations") {
  Hypothesis root;
  root.tokens = {2};
  root.ledger = AttentionLedger::zeros(2);
  StepOutput out;
  out.logprobs = {std::log(0.4), std::log(0.4), std::log(0.2)};
  out.attention = {0.5, 0.5};

  SUBCASE("argmax at K=1 with ties broken toward the lower token id") {
    const auto selected = expand_and_select(std::vector<Hypothesis>{root},
                                            std::vector<StepOutput>{out}, kOnes2, 1,
                                            global_config(0.0, 1.0, 1));
    REQUIRE(selected.size() == 1);
    CHECK(selected[0].tokens == std::vector<TokenId>{2, 0});
  }

  SUBCASE("a beam size above the candidate count keeps everything") {
    const auto selected = expand_and_select(std::vector<Hypothesis>{root},
                                            std::vector<StepOutput>{out}, kOnes2, 1,
                                            global_config(0.0, 1.0, 16));
    CHECK(selected.size() == 3);
  }

  SUBCASE("duplicate beams collapse to distinct sequences") {
    const std::vector<Hypothesis> beams{root, root};
    const std::vector<StepOutput> outs{out, out};
    const auto selected = expand_and_select(beams, outs, kOnes2, 1, global_config(0.0, 1.0, 4));
    CHECK(selected.size() == 3);
  }

  SUBCASE("input shape errors") {
    CHECK_THROWS_AS(expand_and_select({}, {}, kOnes2, 1, global_config(0.0, 1.0, 1)),
                    InvalidInputError);
    const std::vector<Hypothesis> beams{root, root};
    const std::vector<StepOutput> outs{out};
    CHECK_THROWS_AS(expand_and_select(beams, outs, kOnes2, 1, global_config(0.0, 1.0, 1)),
                    LengthMismatchError);
  }
}

TEST_CASE("wide beams match the exhaustive argmax on the fixture") {
  const TableModel model = testing::tm1();
  const SourceDocument src = testing::src2();
  const GlobalAttention g = GlobalAttention::from_values({1.4, 1.6});

  for (double beta : {0.0, 12.0}) {
    ScorerConfig config = global_config(beta, 1.0, 8);
    config.max_steps = 3;
    const DecodeResult beam = beam_search(model, src, g, config);
    const DecodeResult oracle = exhaustive_oracle(model, src, g, config, 3);
    CHECK(oracle.stats.enumerated == 7);
    REQUIRE(beam.best_natural() != nullptr);
    CHECK(beam.best_natural()->hyp.tokens == oracle.best().hyp.tokens);
    CHECK(beam.best_natural()->final_score ==
          doctest::Approx(oracle.best().final_score).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive search guards its enumeration budget") {
  SyntheticSpec spec;
  spec.seed = 2;
  const SyntheticModel model = make_synthetic(spec);
  const SourceDocument src = model.make_source(0);
  const GlobalAttention g = GlobalAttention::from_values(std::vector<double>(src.size(), 1.0));
  CHECK_THROWS_AS(exhaustive_oracle(model, src, g, global_config(12.0, 1.0, 4), 7),
                  SearchSpaceTooLargeError);
}

TEST_CASE("beam search never beats the exhaustive argmax") {
  SyntheticSpec spec;
  spec.seed = 17;
  spec.vocab_size = 4;
  spec.source_len = 3;
  const SyntheticModel model = make_synthetic(spec);
  for (int i = 0; i < 30; ++i) {
    const SyntheticInstance inst = model.make_instance(i);
    const GlobalAttention g = teacher_forced_global_attention(model, inst.source, inst.reference);
    ScorerConfig config = global_config(12.0, 1.0, 4);
    config.max_steps = 4;
    const DecodeResult oracle = exhaustive_oracle(model, inst.source, g, config, 4);
    for (int k : {1, 2, 4, 128}) {
      config.beam_size = k;
      const DecodeResult beam = beam_search(model, inst.source, g, config);
      const ScoredHypothesis* natural = beam.best_natural();
      if (natural == nullptr) continue;
      CHECK(natural->final_score <= oracle.best().final_score + 1e-9);
      if (k == 128) {
        // wide enough to cover every candidate: exact agreement
        CHECK(natural->hyp.tokens == oracle.best().hyp.tokens);
      }
    }
  }
}

TEST_CASE("decoding is deterministic") {
  SyntheticSpec spec;
  spec.seed = 33;
  const SyntheticModel model = make_synthetic(spec);
  const SyntheticInstance inst = model.make_instance(4);
  const GlobalAttention g = teacher_forced_global_attention(model, inst.source, inst.reference);
  const ScorerConfig config = global_config(12.0, 1.0, 8);
  const DecodeResult a = beam_search(model, inst.source, g, config);
  const DecodeResult b = beam_search(model, inst.source, g, config);
  REQUIRE(a.pool.size() == b.pool.size());
  for (std::size_t i = 0; i < a.pool.size(); ++i) {
    CHECK(a.pool[i].hyp == b.pool[i].hyp);
    CHECK(a.pool[i].final_score == b.pool[i].final_score);
  }
}

TEST_CASE("every step evaluates exactly K attention scores") {
  // content tokens dominate, so the pool stays empty until the cap
  StepOutput row;
  for (int v = 0; v < 9; ++v) row.logprobs.push_back(std::log(0.11));
  row.logprobs.push_back(std::log(0.01));
  row.attention = {0.5, 0.5};
  const TableModel model(10, 2, {}, row);
  const SourceDocument src = testing::src2();
  ScorerConfig config = global_config(12.0, 1.0, 4);
  config.max_steps = 5;
  const DecodeResult result =
      beam_search(model, src, GlobalAttention::from_values({2.5, 2.5}), config);
  REQUIRE(result.stats.attention_evals_per_step.size() == 6);  // 5 steps + forced finish
  for (int evals : result.stats.attention_evals_per_step) CHECK(evals == config.beam_size);
  CHECK(result.best_natural() == nullptr);
  for (const ScoredHypothesis& s : result.pool) {
    CHECK(s.hyp.forced);
    CHECK(s.hyp.generated_length() == 6);
    CHECK(std::abs(s.hyp.ledger.total - 6.0) <= 1e-9);
  }
}

TEST_CASE("accumulated joint scores match recomputation") {
  SyntheticSpec spec;
  spec.seed = 29;
  const SyntheticModel model = make_synthetic(spec);
  const ScorerConfig config = global_config(12.0, 1.0, 8);
  for (int i = 0; i < 20; ++i) {
    const SyntheticInstance inst = model.make_instance(i);
    const GlobalAttention g = teacher_forced_global_attention(model, inst.source, inst.reference);
    const DecodeResult result = beam_search(model, inst.source, g, config);
    for (const ScoredHypothesis& s : result.pool) {
      CHECK(std::abs(recompute_joint(s.hyp, config) - s.hyp.joint) <= 1e-9);
      CHECK(std::abs(s.hyp.ledger.total - s.hyp.generated_length()) <= 1e-9);
      double logp = 0.0;
      for (const StepScore& step : s.hyp.steps) logp += step.logp;
      CHECK(std::abs(logp - s.hyp.logprob) <= 1e-9);
    }
  }
}

TEST_CASE("replayed sequences score identically to decoded ones") {
  const TableModel model = testing::tm1();
  const SourceDocument src = testing::src2();
  const GlobalAttention g = GlobalAttention::from_values({1.4, 1.6});
  const ScorerConfig config = global_config(12.0, 1.0, 8);
  const DecodeResult result = beam_search(model, src, g, config);
  for (const ScoredHypothesis& s : result.pool) {
    if (s.hyp.forced) continue;
    const ScoredHypothesis replayed = score_sequence(
        model, src, std::span<const TokenId>(s.hyp.tokens).subspan(1), g, config);
    CHECK(replayed.hyp.joint == doctest::Approx(s.hyp.joint).epsilon(1e-12));
    CHECK(replayed.final_score == doctest::Approx(s.final_score).epsilon(1e-12));
  }
}

TEST_CASE("block schedules cover the step axis") {
  const TableModel model = testing::tm1();
  const SourceDocument src = testing::src2();

  SUBCASE("boundaries at multiples of the block length below Z") {
    std::vector<TokenId> reference(25, 1);
    reference.back() = model.eos_token();
    const BlockSchedule schedule = oracle_block_schedule(model, src, reference, 10);
    REQUIRE(schedule.segments.size() == 3);
    CHECK(schedule.segments[0].first_step == 1);
    CHECK(schedule.segments[0].last_step == 10);
    CHECK(schedule.segments[1].first_step == 11);
    CHECK(schedule.segments[1].last_step == 20);
    CHECK(schedule.segments[2].first_step == 21);
    CHECK(schedule.segments[2].last_step == std::numeric_limits<int>::max());
    CHECK(schedule.segments[0].attention.optimal_length == doctest::Approx(10.0));
    CHECK(schedule.segments[0].attention.values[0] == doctest::Approx(0.7 + 9 * 0.5));
    CHECK(schedule.whole().optimal_length == doctest::Approx(25.0));
    CHECK(schedule.whole().values[0] == doctest::Approx(0.7 + 24 * 0.5));
  }

  SUBCASE("a 32-token target yields three bounded segments plus the whole") {
    std::vector<TokenId> reference(32, 1);
    reference.back() = model.eos_token();
    const BlockSchedule schedule = oracle_block_schedule(model, src, reference, 10);
    REQUIRE(schedule.segments.size() == 4);
    CHECK(schedule.segments[2].last_step == 30);
    CHECK(schedule.segments[2].attention.optimal_length == doctest::Approx(30.0));
    CHECK(schedule.whole().optimal_length == doctest::Approx(32.0));
  }

  SUBCASE("a block length at or above Z degenerates to plain decoding") {
    const std::vector<TokenId> reference{0, 1, 2};
    const BlockSchedule schedule = oracle_block_schedule(model, src, reference, 10);
    REQUIRE(schedule.segments.size() == 1);
    const ScorerConfig config = global_config(12.0, 1.0, 4);
    const DecodeResult blocked = blocked_decode(model, src, schedule, config);
    const DecodeResult plain = beam_search(model, src, schedule.whole(), config);
    REQUIRE(blocked.pool.size() == plain.pool.size());
    for (std::size_t i = 0; i < blocked.pool.size(); ++i) {
      CHECK(blocked.pool[i].hyp == plain.pool[i].hyp);
      CHECK(blocked.pool[i].final_score == plain.pool[i].final_score);
    }
  }

  SUBCASE("invalid schedules are rejected") {
    BlockSchedule gap;
    gap.segments.push_back({1, 5, kOnes2});
    gap.segments.push_back({7, std::numeric_limits<int>::max(), kOnes2});
    CHECK_THROWS_AS(gap.validate(), InvalidScheduleError);
    BlockSchedule closed;
    closed.segments.push_back({1, 5, kOnes2});
    CHECK_THROWS_AS(closed.validate(), InvalidScheduleError);
    CHECK_THROWS_AS(
        blocked_decode(model, src, closed, global_config(12.0, 1.0, 2)), InvalidScheduleError);
  }
}

TEST_CASE("blocked decoding switches the scoring distribution per step") {
  const TableModel model = testing::tm1();
  const SourceDocument src = testing::src2();
  // two segments with very different targets change step-1 attention scores
  BlockSchedule schedule;
  schedule.segments.push_back({1, 1, GlobalAttention::from_values({0.0, 5.0})});
  schedule.segments.push_back(
      {2, std::numeric_limits<int>::max(), GlobalAttention::from_values({5.0, 5.0})});
  const ScorerConfig config = global_config(12.0, 0.0, 2);
  const DecodeResult blocked = blocked_decode(model, src, schedule, config);
  const DecodeResult plain = beam_search(model, src, schedule.whole(), config);
  // step 1 row [0.7, 0.3] exceeds the first segment on token 0
  CHECK(blocked.best().hyp.steps.front().attention <
        plain.best().hyp.steps.front().attention - 0.1);
}

TEST_CASE("a minimum length suppresses early termination") {
  const TableModel model = testing::tm1();
  const SourceDocument src = testing::src2();
  ScorerConfig config = global_config(0.0, 1.0, 1);
  config.min_length = 4;
  config.max_steps = 10;
  const DecodeResult result =
      beam_search(model, src, GlobalAttention::from_values({1.4, 1.6}), config);
  CHECK(result.best().hyp.generated_length() >= 4);
  CHECK(result.best().hyp.tokens[3] != model.eos_token());
}

TEST_CASE("a vocabulary without end-of-sequence cannot decode") {
  struct BadEos : TableModel {
    explicit BadEos(TableModel base) : TableModel(std::move(base)) {}
    TokenId eos_token() const override { return 7; }
  };
  const BadEos model(testing::tm1());
  CHECK_THROWS_AS(
      beam_search(model, testing::src2(), kOnes2, global_config(0.0, 1.0, 1)),
      NoHypothesisError);
}

TEST_CASE("trace snapshots record each step") {
  const TableModel model = testing::tm1();
  ScorerConfig config = global_config(0.0, 1.0, 2);
  config.record_trace = true;
  config.max_steps = 3;
  const DecodeResult result =
      beam_search(model, testing::src2(), GlobalAttention::from_values({1.4, 1.6}), config);
  REQUIRE(result.trace.has_value());
  REQUIRE(!result.trace->empty());
  CHECK(result.trace->front().step == 1);
  for (const BeamSnapshot& snapshot : *result.trace) {
    CHECK(snapshot.frontier.size() <= 2);
    CHECK(!snapshot_to_json(snapshot).empty());
  }
}

TEST_CASE("repetition overlay keeps decoding consistent") {
  SyntheticSpec spec;
  spec.seed = 51;
  const SyntheticModel model = make_synthetic(spec);
  const SyntheticInstance inst = model.make_instance(0);
  const GlobalAttention g = teacher_forced_global_attention(model, inst.source, inst.reference);
  ScorerConfig config = global_config(12.0, 1.0, 4);
  config.repetition_theta = 1.5;
  const DecodeResult result = beam_search(model, inst.source, g, config);
  for (const ScoredHypothesis& s : result.pool) {
    CHECK(std::abs(recompute_joint(s.hyp, config) - s.hyp.joint) <= 1e-9);
  }
  const DecodeResult again = beam_search(model, inst.source, g, config);
  CHECK(result.best().hyp == again.best().hyp);
}
