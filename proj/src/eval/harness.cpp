#include "gabs/eval/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "gabs/core/rng.hpp"
#include "gabs/eval/rouge.hpp"
#include "gabs/scoring/scoring.hpp"

namespace gabs {

namespace {

std::uint64_t instance_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = hash_combine(seed, 0x6964u);
  for (char c : id) h = hash_combine(h, static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  return h;
}

double attention_product_of(const Hypothesis& h) {
  double product = 1.0;
  for (const StepScore& s : h.steps) product *= s.attention;
  return product;
}

ExperimentRecord make_experiment_record(const Instance& instance, const DecodeResult& result,
                                        const GlobalAttention& g, const HarnessOptions& options,
                                        const ScorerConfig& config, double wall_ms) {
  const ScoredHypothesis& best = result.best();
  ExperimentRecord record;
  record.id = instance.id;
  record.config = config;
  record.g_mode = options.g_mode;
  record.sigma = options.sigma;
  record.hypothesis.assign(best.hyp.tokens.begin() + 1, best.hyp.tokens.end());
  record.final_score = best.final_score;
  record.attention_product = attention_product_of(best.hyp);
  record.length = best.hyp.generated_length();
  record.z = g.optimal_length;
  record.forced = best.hyp.forced;
  record.wall_ms = wall_ms;
  return record;
}

struct TimedDecode {
  DecodeResult result;
  double wall_ms = 0.0;
};

TimedDecode timed_decode(const Model& model, const SourceDocument& source,
                         const GlobalAttention& g, const ScorerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  DecodeResult result = beam_search(model, source, g, config);
  const auto stop = std::chrono::steady_clock::now();
  return {std::move(result),
          std::chrono::duration<double, std::milli>(stop - start).count()};
}

}  // namespace

GlobalAttention resolve_global_attention(const Model& model, const Instance& instance, GMode mode,
                                         double sigma, std::uint64_t seed,
                                         const PredictorParams* predictor) {
  switch (mode) {
    case GMode::Provided:
      if (!instance.global_attention)
        throw InvalidInputError("instance " + instance.id + " carries no global_attention");
      return *instance.global_attention;
    case GMode::Oracle:
      if (instance.reference)
        return teacher_forced_global_attention(model, instance.source, *instance.reference);
      if (instance.global_attention) return *instance.global_attention;
      throw InvalidInputError("instance " + instance.id +
                              " has neither a reference nor a stored distribution");
    case GMode::Corrupted: {
      const GlobalAttention base =
          resolve_global_attention(model, instance, GMode::Oracle, 0.0, seed, nullptr);
      return corrupt(base, sigma, instance_seed(seed, instance.id));
    }
    case GMode::Predicted:
      if (!predictor) throw InvalidInputError("predicted g-mode needs trained predictor parameters");
      return predict(*predictor, instance.source).as_global();
  }
  throw InvalidInputError("unknown g-mode");
}

ResultRecord make_result_record(const Instance& instance, const DecodeResult& result,
                                const GlobalAttention& g) {
  const ScoredHypothesis& best = result.best();
  ResultRecord record;
  record.id = instance.id;
  record.hypothesis.assign(best.hyp.tokens.begin() + 1, best.hyp.tokens.end());
  record.final_score = best.final_score;
  record.attention_score =
      best.hyp.ledger.total > 0.0 ? attention_score(best.hyp.ledger, g) : 0.0;
  record.length = best.hyp.generated_length();
  record.z = g.optimal_length;
  record.forced = best.hyp.forced;
  return record;
}

AggregateMetrics aggregate_metrics(std::span<const ExperimentRecord> records,
                                   std::span<const Instance> instances) {
  AggregateMetrics agg;
  if (records.empty()) return agg;
  std::unordered_map<std::string, const Instance*> by_id;
  for (const Instance& inst : instances) by_id[inst.id] = &inst;

  bool all_have_reference = true;
  double r1 = 0.0, r2 = 0.0, rl = 0.0;
  for (const ExperimentRecord& r : records) {
    ++agg.count;
    agg.mean_final_score += r.final_score;
    agg.mean_length += static_cast<double>(r.length);
    agg.mean_abs_length_deviation += std::abs(static_cast<double>(r.length) - r.z);
    agg.mean_attention_product += r.attention_product;
    if (r.forced) ++agg.forced_count;
    const auto it = by_id.find(r.id);
    if (it == by_id.end() || !it->second->reference) {
      all_have_reference = false;
      continue;
    }
    const auto& ref = *it->second->reference;
    r1 += rouge(ref, r.hypothesis, RougeOrder::One).f1;
    r2 += rouge(ref, r.hypothesis, RougeOrder::Two).f1;
    rl += rouge(ref, r.hypothesis, RougeOrder::Lcs).f1;
  }
  const double n = static_cast<double>(agg.count);
  agg.mean_final_score /= n;
  agg.mean_length /= n;
  agg.mean_abs_length_deviation /= n;
  agg.mean_attention_product /= n;
  if (all_have_reference) {
    agg.mean_rouge1_f = r1 / n;
    agg.mean_rouge2_f = r2 / n;
    agg.mean_rougeL_f = rl / n;
  }
  return agg;
}

std::vector<double> default_beta_grid() { return {2, 4, 6, 10, 12, 15, 18, 20}; }
std::vector<double> default_gamma_grid() { return {0, 0.5, 1, 1.5, 2}; }

SweepTable run_sweep(const Model& model, std::span<const Instance> instances,
                     std::span<const double> betas, std::span<const double> gammas,
                     const HarnessOptions& options) {
  if (instances.empty()) throw EmptyDatasetError("sweep needs at least one instance");
  SweepTable table;
  for (double beta : betas) {
    for (double gamma : gammas) {
      ScorerConfig config = options.config;
      config.beta = beta;
      config.gamma = gamma;
      std::vector<ExperimentRecord> cell_records;
      cell_records.reserve(instances.size());
      for (const Instance& instance : instances) {
        const GlobalAttention g = resolve_global_attention(
            model, instance, options.g_mode, options.sigma, config.seed,
            options.predictor ? &*options.predictor : nullptr);
        const TimedDecode decode = timed_decode(model, instance.source, g, config);
        cell_records.push_back(
            make_experiment_record(instance, decode.result, g, options, config, decode.wall_ms));
      }
      table.cells.push_back({beta, gamma, aggregate_metrics(cell_records, instances)});
      table.records.insert(table.records.end(), cell_records.begin(), cell_records.end());
    }
  }
  return table;
}

DegradationTable run_degradation(const Model& model, std::span<const Instance> instances,
                                 std::span<const int> beam_sizes, const HarnessOptions& options) {
  if (instances.empty()) throw EmptyDatasetError("degradation run needs at least one instance");
  if (beam_sizes.empty()) throw InvalidInputError("degradation run needs at least one beam size");

  // Objectives are always compared under the joint scorer with the oracle
  // distribution.
  ScorerConfig objective_config = options.config;
  objective_config.scorer = ScorerKind::Global;

  std::vector<GlobalAttention> oracle_g;
  oracle_g.reserve(instances.size());
  for (const Instance& instance : instances) {
    oracle_g.push_back(resolve_global_attention(model, instance, GMode::Oracle, 0.0,
                                                options.config.seed, nullptr));
  }

  std::optional<PredictorParams> predictor = options.predictor;
  if (!predictor) {
    // Train one on the dataset itself when every instance has features.
    bool trainable = true;
    for (const Instance& instance : instances) {
      if (!instance.source.features) trainable = false;
    }
    if (trainable) {
      std::vector<TrainExample> examples;
      examples.reserve(instances.size());
      for (std::size_t i = 0; i < instances.size(); ++i) {
        examples.push_back({instances[i].source, oracle_g[i]});
      }
      predictor = train(init_predictor(examples, 0.05, 150, options.config.seed), examples).params;
    }
  }

  DegradationTable table;
  auto run_mode = [&](const std::string& mode, ScorerKind scorer, GMode g_mode, int beam_size) {
    ScorerConfig config = options.config;
    config.scorer = scorer;
    config.beam_size = beam_size;
    if (options.oracle_l_max) config.max_steps = *options.oracle_l_max;
    DegradationRow row;
    row.mode = mode;
    row.beam_size = beam_size;
    std::vector<ExperimentRecord> mode_records;
    HarnessOptions mode_options = options;
    mode_options.g_mode = g_mode;
    mode_options.predictor = predictor;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const GlobalAttention g =
          g_mode == GMode::Oracle
              ? oracle_g[i]
              : resolve_global_attention(model, instances[i], g_mode, options.sigma, config.seed,
                                         predictor ? &*predictor : nullptr);
      const TimedDecode decode = timed_decode(model, instances[i].source, g, config);
      mode_records.push_back(
          make_experiment_record(instances[i], decode.result, g, mode_options, config,
                                 decode.wall_ms));
      const ScoredHypothesis* natural = decode.result.best_natural();
      row.per_instance_objective.push_back(
          natural ? score_sequence(model, instances[i].source,
                                   std::span<const TokenId>(natural->hyp.tokens).subspan(1),
                                   oracle_g[i], objective_config)
                        .final_score
                  : std::numeric_limits<double>::quiet_NaN());
    }
    row.metrics = aggregate_metrics(mode_records, instances);
    table.rows.push_back(std::move(row));
    table.records.insert(table.records.end(), mode_records.begin(), mode_records.end());
  };

  for (int k : beam_sizes) run_mode("beam", ScorerKind::Beam, GMode::Oracle, k);
  for (int k : beam_sizes) run_mode("global-oracle", ScorerKind::Global, GMode::Oracle, k);
  if (predictor) {
    for (int k : beam_sizes) run_mode("global-predicted", ScorerKind::Global, GMode::Predicted, k);
  }

  if (options.oracle_l_max) {
    ScorerConfig config = objective_config;
    config.beam_size = 1;
    DegradationRow row;
    row.mode = "exhaustive";
    row.beam_size = 0;
    std::vector<ExperimentRecord> mode_records;
    HarnessOptions mode_options = options;
    mode_options.g_mode = GMode::Oracle;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto start = std::chrono::steady_clock::now();
      const DecodeResult result = exhaustive_oracle(model, instances[i].source, oracle_g[i],
                                                    config, *options.oracle_l_max);
      const auto stop = std::chrono::steady_clock::now();
      mode_records.push_back(make_experiment_record(
          instances[i], result, oracle_g[i], mode_options, config,
          std::chrono::duration<double, std::milli>(stop - start).count()));
      row.per_instance_objective.push_back(result.best().final_score);
    }
    row.metrics = aggregate_metrics(mode_records, instances);
    table.rows.push_back(std::move(row));
    table.records.insert(table.records.end(), mode_records.begin(), mode_records.end());
  }
  return table;
}

}  // namespace gabs
