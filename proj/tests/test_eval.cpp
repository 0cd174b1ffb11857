#include <cstdio>
#include <vector>

#include "doctest.h"
#include "gabs/core/rng.hpp"
#include "gabs/eval/harness.hpp"
#include "gabs/eval/metrics.hpp"
#include "gabs/eval/rouge.hpp"
#include "gabs/model/synthetic.hpp"

using namespace gabs;

namespace {

std::vector<Instance> synthetic_instances(std::uint64_t seed, int count) {
  SyntheticSpec spec;
  spec.seed = seed;
  const SyntheticModel model = make_synthetic(spec);
  std::vector<Instance> instances;
  for (int i = 0; i < count; ++i) {
    SyntheticInstance made = model.make_instance(i);
    Instance instance;
    instance.id = "t-" + std::to_string(i);
    instance.reference = made.reference;
    instance.source = std::move(made.source);
    instances.push_back(std::move(instance));
  }
  return instances;
}

void clear_wall_times(std::vector<ExperimentRecord>& records) {
  for (ExperimentRecord& r : records) r.wall_ms = 0.0;
}

}  // namespace

TEST_CASE("rouge hand-checked values") {
  const std::vector<TokenId> ref{0, 1, 2};
  const std::vector<TokenId> hyp{0, 1, 3};

  const RougeScore r1 = rouge(ref, hyp, RougeOrder::One);
  CHECK(r1.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r1.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r1.f1 == doctest::Approx(2.0 / 3.0));

  const RougeScore r2 = rouge(ref, hyp, RougeOrder::Two);
  CHECK(r2.precision == doctest::Approx(0.5));
  CHECK(r2.recall == doctest::Approx(0.5));
  CHECK(r2.f1 == doctest::Approx(0.5));

  const RougeScore rl = rouge(ref, hyp, RougeOrder::Lcs);
  CHECK(rl.f1 == doctest::Approx(2.0 / 3.0));

  for (RougeOrder order : {RougeOrder::One, RougeOrder::Two, RougeOrder::Lcs}) {
    const RougeScore self = rouge(ref, ref, order);
    CHECK(self.precision == doctest::Approx(1.0));
    CHECK(self.recall == doctest::Approx(1.0));
    CHECK(self.f1 == doctest::Approx(1.0));
  }
}

TEST_CASE("rouge clips repeated n-grams") {
  const std::vector<TokenId> ref{0, 0, 1};
  const std::vector<TokenId> hyp{0, 0, 0};
  const RougeScore r1 = rouge(ref, hyp, RougeOrder::One);
  CHECK(r1.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r1.recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rouge edge cases") {
  const std::vector<TokenId> ref{0, 1};
  CHECK(rouge(ref, {}, RougeOrder::One) == RougeScore{});
  CHECK_THROWS_AS(rouge({}, ref, RougeOrder::One), EmptyReferenceError);
  // single-token pairs have no bigrams
  const RougeScore r2 = rouge(std::vector<TokenId>{0}, std::vector<TokenId>{0}, RougeOrder::Two);
  CHECK(r2.f1 == doctest::Approx(0.0));
}

TEST_CASE("rouge bounds and harmonic identity") {
  SplitMix64 rng(88);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenId> ref(1 + rng.next() % 12), hyp(1 + rng.next() % 12);
    for (TokenId& t : ref) t = static_cast<TokenId>(rng.next() % 5);
    for (TokenId& t : hyp) t = static_cast<TokenId>(rng.next() % 5);
    for (RougeOrder order : {RougeOrder::One, RougeOrder::Two, RougeOrder::Lcs}) {
      const RougeScore s = rouge(ref, hyp, order);
      CHECK(s.precision >= 0.0);
      CHECK(s.precision <= 1.0);
      CHECK(s.recall >= 0.0);
      CHECK(s.recall <= 1.0);
      const double expected =
          s.precision + s.recall > 0.0
              ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
              : 0.0;
      CHECK(s.f1 == expected);
      const RougeScore self = rouge(ref, ref, order);
      if (static_cast<int>(ref.size()) >= (order == RougeOrder::Two ? 2 : 1))
        CHECK(self.f1 == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("novel word percentage") {
  const std::vector<TokenId> source{0, 1, 2, 3};
  CHECK(novel_word_pct(source, std::vector<TokenId>{0, 2, 2}) == doctest::Approx(0.0));
  CHECK(novel_word_pct(source, std::vector<TokenId>{0, 1, 2, 9}) == doctest::Approx(25.0));
  CHECK(novel_word_pct(source, std::vector<TokenId>{7, 8, 9}) == doctest::Approx(100.0));
  CHECK_THROWS_AS(novel_word_pct(source, {}), EmptyHypothesisError);
}

TEST_CASE("divergence position") {
  const std::vector<TokenId> abc{0, 1, 2};
  CHECK(!divergence_position(abc, abc).has_value());
  CHECK(divergence_position(std::vector<TokenId>{5, 1, 2}, abc) == 1);
  CHECK(divergence_position(abc, std::vector<TokenId>{0, 1, 3}) == 3);
  CHECK(divergence_position(std::vector<TokenId>{0, 1}, abc) == 3);
  CHECK_THROWS_AS(divergence_position({}, abc), InvalidInputError);
}

TEST_CASE("length statistics") {
  ResultRecord one;
  one.length = 5;
  one.z = 5.0;
  const LengthStats single = length_stats(std::vector<ResultRecord>{one});
  CHECK(single.mean_length == doctest::Approx(5.0));
  CHECK(single.mean_abs_deviation == doctest::Approx(0.0));

  ResultRecord a = one, b = one;
  a.length = 4;
  b.length = 6;
  const LengthStats pair = length_stats(std::vector<ResultRecord>{a, b});
  CHECK(pair.mean_length == doctest::Approx(5.0));
  CHECK(pair.mean_abs_deviation == doctest::Approx(1.0));

  CHECK_THROWS_AS(length_stats({}), EmptySetError);
}

TEST_CASE("records round-trip through json") {
  Instance instance;
  instance.id = "inst-1";
  instance.source.tokens = {3, 1, 4};
  instance.source.features = std::vector<std::vector<double>>{{0.25, -1.5}, {0.0, 2.0}, {1.0, 1.0}};
  instance.reference = std::vector<TokenId>{1, 5, 2};
  instance.global_attention = GlobalAttention::from_values({0.5, 1.25, 1.25});
  CHECK(instance_from_json(instance_to_json(instance)) == instance);

  Instance bare;
  bare.id = "inst-2";
  bare.source.tokens = {0};
  CHECK(instance_from_json(instance_to_json(bare)) == bare);

  ResultRecord result;
  result.id = "inst-1";
  result.hypothesis = {1, 5, 2};
  result.final_score = -0.25;
  result.attention_score = 0.875;
  result.length = 3;
  result.z = 3.0;
  result.forced = true;
  CHECK(result_from_json(result_to_json(result)) == result);

  ExperimentRecord record;
  record.id = "inst-1";
  record.config.scorer = ScorerKind::CoverageTrunc;
  record.config.beta = 2.5;
  record.config.max_steps = 17;
  record.config.repetition_theta = 1.25;
  record.g_mode = GMode::Corrupted;
  record.sigma = 0.4;
  record.hypothesis = {0, 2};
  record.final_score = -1.5;
  record.attention_product = 0.5;
  record.length = 2;
  record.z = 2.0;
  record.wall_ms = 12.5;
  CHECK(experiment_from_json(experiment_to_json(record)) == record);

  CHECK_THROWS_AS(instance_from_json("{"), InvalidInputError);
  CHECK_THROWS_AS(result_from_json(R"({"id": "x"})"), InvalidInputError);
}

TEST_CASE("sweep shapes and determinism") {
  SyntheticSpec spec;
  spec.seed = 37;
  const SyntheticModel model = make_synthetic(spec);
  const auto instances = synthetic_instances(37, 4);
  HarnessOptions options;
  options.config.beam_size = 2;

  const std::vector<double> one_beta{12.0};
  const std::vector<double> one_gamma{1.0};
  SweepTable small = run_sweep(model, instances, one_beta, one_gamma, options);
  CHECK(small.cells.size() == 1);
  CHECK(small.records.size() == instances.size());
  CHECK(small.cells[0].metrics.count == 4);
  CHECK(small.cells[0].metrics.mean_rouge1_f.has_value());

  const auto betas = default_beta_grid();
  const auto gammas = default_gamma_grid();
  CHECK(betas.size() * gammas.size() == 40);

  SweepTable again = run_sweep(model, instances, one_beta, one_gamma, options);
  clear_wall_times(small.records);
  clear_wall_times(again.records);
  CHECK(small.records == again.records);
}

TEST_CASE("degradation shapes") {
  SyntheticSpec spec;
  spec.seed = 39;
  spec.vocab_size = 4;
  spec.source_len = 3;
  const SyntheticModel model = make_synthetic(spec);
  const auto instances = synthetic_instances(39, 3);
  // features present, so the harness trains its own predictor
  std::vector<Instance> featured;
  for (int i = 0; i < 3; ++i) {
    SyntheticInstance made = model.make_instance(i);
    Instance instance;
    instance.id = "d-" + std::to_string(i);
    instance.reference = made.reference;
    instance.source = std::move(made.source);
    featured.push_back(std::move(instance));
  }

  HarnessOptions options;
  options.config.beam_size = 2;
  options.oracle_l_max = 4;

  const std::vector<int> single_k{1};
  const DegradationTable table = run_degradation(model, featured, single_k, options);
  REQUIRE(table.rows.size() == 4);  // beam, global-oracle, global-predicted, exhaustive
  CHECK(table.rows[0].mode == "beam");
  CHECK(table.rows[1].mode == "global-oracle");
  CHECK(table.rows[2].mode == "global-predicted");
  CHECK(table.rows[3].mode == "exhaustive");
  CHECK(table.rows[3].beam_size == 0);
  for (const DegradationRow& row : table.rows)
    CHECK(row.per_instance_objective.size() == featured.size());

  const std::vector<int> five_k{1, 2, 4, 8, 16};
  const DegradationTable wide = run_degradation(model, featured, five_k, options);
  CHECK(wide.rows.size() == 3 * 5 + 1);
}
