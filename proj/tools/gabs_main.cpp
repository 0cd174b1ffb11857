// Command-line surface: decoding, exhaustive search, predictor training,
// metric evaluation, the beta/gamma sweep and degradation harnesses, dataset
// generation, and the property-check runner.
//
// Exit codes: 0 success, 1 invalid input, 2 property failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "gabs/core/rng.hpp"
#include "gabs/eval/harness.hpp"
#include "gabs/eval/metrics.hpp"
#include "gabs/eval/rouge.hpp"
#include "gabs/io/records.hpp"
#include "gabs/model/synthetic.hpp"
#include "gabs/predictor/predictor.hpp"
#include "gabs/scoring/scoring.hpp"
#include "gabs/search/beam.hpp"
#include "gabs/search/oracle.hpp"

namespace {

using namespace gabs;

struct DecodeArgs {
  std::string model_path;
  std::string data_path;
  std::string scorer = "global";
  double beta = 12.0;
  double gamma = 1.0;
  int beam_size = 4;
  std::string g_mode = "oracle";
  double sigma = 0.0;
  int block_length = 0;
  int max_steps = 0;
  double a = 1.0;
  double repetition_theta = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string predictor_path;
  int l_max = 4;  // oracle subcommand only
};

ScorerConfig build_config(const DecodeArgs& args, bool g_mode_given) {
  ScorerConfig config;
  config.scorer = scorer_kind_from_string(args.scorer);
  config.beta = args.beta;
  config.gamma = args.gamma;
  config.a = args.a;
  config.beam_size = args.beam_size;
  config.seed = args.seed;
  if (args.repetition_theta > 0.0) config.repetition_theta = args.repetition_theta;
  if (args.block_length > 0) config.block_length = args.block_length;
  if (args.max_steps > 0) config.max_steps = args.max_steps;
  // Coverage thresholds switch to per-token global attention when the caller
  // names a distribution explicitly; plain runs keep the constant 1.
  if (config.scorer == ScorerKind::CoverageGnmt) config.coverage_g_thresholds = g_mode_given;
  config.validate();
  return config;
}

std::optional<PredictorParams> maybe_load_predictor(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_checkpoint(path);
}

int run_decode(const DecodeArgs& args, bool g_mode_given) {
  const ScorerConfig config = build_config(args, g_mode_given);
  const auto model = load_model(args.model_path);
  const auto instances = load_instances(args.data_path);
  const auto predictor = maybe_load_predictor(args.predictor_path);
  const GMode mode = g_mode_from_string(args.g_mode);
  if (mode == GMode::Predicted && !predictor)
    throw InvalidInputError("--g-mode predicted needs --predictor FILE");

  std::vector<ResultRecord> records;
  records.reserve(instances.size());
  for (const Instance& instance : instances) {
    if (config.block_length) {
      if (mode != GMode::Oracle)
        throw InvalidInputError("blocked decoding derives its segments from the reference; "
                                "use --g-mode oracle");
      if (!instance.reference)
        throw InvalidInputError("instance " + instance.id + " has no reference");
      const BlockSchedule schedule = oracle_block_schedule(*model, instance.source,
                                                           *instance.reference,
                                                           *config.block_length);
      const DecodeResult result = blocked_decode(*model, instance.source, schedule, config);
      records.push_back(make_result_record(instance, result, schedule.whole()));
    } else {
      const GlobalAttention g = resolve_global_attention(
          *model, instance, mode, args.sigma, config.seed, predictor ? &*predictor : nullptr);
      const DecodeResult result = beam_search(*model, instance.source, g, config);
      records.push_back(make_result_record(instance, result, g));
    }
  }
  save_results(records, args.out_path);
  double mean_final = 0.0, mean_len = 0.0;
  int forced = 0;
  for (const ResultRecord& r : records) {
    mean_final += r.final_score;
    mean_len += r.length;
    forced += r.forced ? 1 : 0;
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  std::printf("decoded %zu instances  mean_final=%.4f  mean_length=%.2f  forced=%d\n",
              records.size(), mean_final / n, mean_len / n, forced);
  return 0;
}

int run_oracle(const DecodeArgs& args) {
  const ScorerConfig config = build_config(args, true);
  const auto model = load_model(args.model_path);
  const auto instances = load_instances(args.data_path);
  const auto predictor = maybe_load_predictor(args.predictor_path);
  const GMode mode = g_mode_from_string(args.g_mode);

  std::vector<ResultRecord> records;
  records.reserve(instances.size());
  for (const Instance& instance : instances) {
    const GlobalAttention g = resolve_global_attention(
        *model, instance, mode, args.sigma, config.seed, predictor ? &*predictor : nullptr);
    const DecodeResult result = exhaustive_oracle(*model, instance.source, g, config, args.l_max);
    records.push_back(make_result_record(instance, result, g));
  }
  save_results(records, args.out_path);
  std::printf("enumerated %zu instances (l_max=%d)\n", records.size(), args.l_max);
  return 0;
}

int run_train_predictor(const std::string& data_path, const std::string& model_path, double lr,
                        int epochs, std::uint64_t seed, bool smooth,
                        const std::string& out_path) {
  const auto instances = load_instances(data_path);
  std::unique_ptr<Model> model;
  if (!model_path.empty()) model = load_model(model_path);

  std::vector<TrainExample> examples;
  examples.reserve(instances.size());
  for (const Instance& instance : instances) {
    GlobalAttention g;
    if (instance.global_attention) {
      g = *instance.global_attention;
    } else if (model && instance.reference) {
      g = teacher_forced_global_attention(*model, instance.source, *instance.reference);
    } else {
      throw InvalidInputError("instance " + instance.id +
                              " has no global_attention; pass --model to teacher-force it");
    }
    examples.push_back({instance.source, std::move(g)});
  }

  const TrainResult trained = train(init_predictor(examples, lr, epochs, seed, smooth), examples);
  save_checkpoint(trained.params, out_path);
  const double final_loss = mean_loss(trained.params, examples);
  std::printf("trained on %zu examples  initial_loss=%.6f  final_loss=%.6f  train_r2=%.4f\n",
              examples.size(),
              trained.loss_trajectory.empty() ? final_loss : trained.loss_trajectory.front(),
              final_loss, r_squared(trained.params, examples));
  return 0;
}

int run_eval(const std::string& ref_path, const std::string& hyp_path) {
  const auto instances = load_instances(ref_path);
  const auto results = load_results(hyp_path);
  std::unordered_map<std::string, const Instance*> by_id;
  for (const Instance& inst : instances) by_id[inst.id] = &inst;

  RougeScore r1, r2, rl;
  double novel = 0.0;
  int joined = 0;
  for (const ResultRecord& r : results) {
    auto it = by_id.find(r.id);
    if (it == by_id.end() || !it->second->reference) continue;
    const auto& ref = *it->second->reference;
    const auto add = [](RougeScore& acc, const RougeScore& s) {
      acc.precision += s.precision;
      acc.recall += s.recall;
      acc.f1 += s.f1;
    };
    add(r1, rouge(ref, r.hypothesis, RougeOrder::One));
    add(r2, rouge(ref, r.hypothesis, RougeOrder::Two));
    add(rl, rouge(ref, r.hypothesis, RougeOrder::Lcs));
    if (!r.hypothesis.empty()) novel += novel_word_pct(it->second->source.tokens, r.hypothesis);
    ++joined;
  }
  if (joined == 0) throw InvalidInputError("no result line matched a reference-bearing instance");
  const double n = static_cast<double>(joined);
  const LengthStats lengths = length_stats(results);
  std::printf("instances     %d\n", joined);
  std::printf("metric        P        R        F1\n");
  std::printf("rouge-1    %.4f   %.4f   %.4f\n", r1.precision / n, r1.recall / n, r1.f1 / n);
  std::printf("rouge-2    %.4f   %.4f   %.4f\n", r2.precision / n, r2.recall / n, r2.f1 / n);
  std::printf("rouge-L    %.4f   %.4f   %.4f\n", rl.precision / n, rl.recall / n, rl.f1 / n);
  std::printf("novel%%        %.2f\n", novel / n);
  std::printf("mean_length   %.2f\n", lengths.mean_length);
  std::printf("mean_|len-Z|  %.2f\n", lengths.mean_abs_deviation);
  return 0;
}

void print_metrics_row(const char* label, int beam_size, const AggregateMetrics& m) {
  std::printf("%-18s %4d  %10.4f  %8.2f  %8.2f  %8.4f", label, beam_size, m.mean_final_score,
              m.mean_length, m.mean_abs_length_deviation, m.mean_attention_product);
  if (m.mean_rouge1_f)
    std::printf("  %.4f/%.4f/%.4f", *m.mean_rouge1_f, *m.mean_rouge2_f, *m.mean_rougeL_f);
  std::printf("  forced=%d\n", m.forced_count);
}

int run_sweep_cmd(const DecodeArgs& args, std::vector<double> betas, std::vector<double> gammas) {
  if (betas.empty()) betas = default_beta_grid();
  if (gammas.empty()) gammas = default_gamma_grid();
  HarnessOptions options;
  options.config = build_config(args, true);
  options.g_mode = g_mode_from_string(args.g_mode);
  options.sigma = args.sigma;
  options.predictor = maybe_load_predictor(args.predictor_path);
  const auto model = load_model(args.model_path);
  const auto instances = load_instances(args.data_path);

  const SweepTable table = run_sweep(*model, instances, betas, gammas, options);
  std::printf("%-8s %-8s %10s %9s %9s %10s\n", "beta", "gamma", "final", "length", "|len-Z|",
              "att_prod");
  for (const SweepCell& cell : table.cells) {
    std::printf("%-8.2f %-8.2f %10.4f %9.2f %9.2f %10.4f", cell.beta, cell.gamma,
                cell.metrics.mean_final_score, cell.metrics.mean_length,
                cell.metrics.mean_abs_length_deviation, cell.metrics.mean_attention_product);
    if (cell.metrics.mean_rouge1_f)
      std::printf("  %.4f/%.4f/%.4f", *cell.metrics.mean_rouge1_f, *cell.metrics.mean_rouge2_f,
                  *cell.metrics.mean_rougeL_f);
    std::printf("\n");
  }
  if (!args.out_path.empty()) save_experiments(table.records, args.out_path);
  return 0;
}

int run_degradation_cmd(const DecodeArgs& args, std::vector<int> k_list, int l_max) {
  if (k_list.empty()) k_list = {1, 2, 4, 8, 16};
  HarnessOptions options;
  options.config = build_config(args, true);
  options.g_mode = g_mode_from_string(args.g_mode);
  options.sigma = args.sigma;
  options.predictor = maybe_load_predictor(args.predictor_path);
  if (l_max > 0) options.oracle_l_max = l_max;
  const auto model = load_model(args.model_path);
  const auto instances = load_instances(args.data_path);

  const DegradationTable table = run_degradation(*model, instances, k_list, options);
  std::printf("%-18s %4s  %10s  %8s  %8s  %8s\n", "mode", "K", "final", "length", "|len-Z|",
              "att_prod");
  for (const DegradationRow& row : table.rows) {
    print_metrics_row(row.mode.c_str(), row.beam_size, row.metrics);
  }
  if (!args.out_path.empty()) save_experiments(table.records, args.out_path);
  return 0;
}

int run_gen_data(const std::string& model_path, int count, std::uint64_t start,
                 const std::string& out_path) {
  const auto model = load_model(model_path);
  const auto* synthetic = dynamic_cast<const SyntheticModel*>(model.get());
  if (!synthetic) throw InvalidInputError("gen-data needs a synthetic model file");
  std::vector<Instance> instances;
  instances.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t index = start + static_cast<std::uint64_t>(i);
    SyntheticInstance made = synthetic->make_instance(index);
    Instance instance;
    instance.id = "synth-" + std::to_string(synthetic->spec().seed) + "-" + std::to_string(index);
    instance.global_attention =
        teacher_forced_global_attention(*synthetic, made.source, made.reference);
    instance.source = std::move(made.source);
    instance.reference = std::move(made.reference);
    instances.push_back(std::move(instance));
  }
  save_instances(instances, out_path);
  std::printf("wrote %zu instances to %s\n", instances.size(), out_path.c_str());
  return 0;
}

// --- property checks (verify subcommand) ------------------------------------

bool check(const char* name, bool ok, int& failures) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
  if (!ok) ++failures;
  return ok;
}

int run_verify() {
  int failures = 0;

  {  // closed form, monotonicity, bounds, all-exceed limit
    SplitMix64 rng(2024);
    bool identity = true, monotone = true, bounds = true, all_exceed = true;
    for (int trial = 0; trial < 10000; ++trial) {
      const int n = 2 + static_cast<int>(rng.next() % 6);
      std::vector<double> l(n), gv(n);
      for (double& x : l) x = rng.uniform(0.0, 2.0);
      for (double& x : gv) x = rng.uniform(0.0, 2.0);
      const AttentionLedger ledger = AttentionLedger::from_local(l);
      const GlobalAttention g = GlobalAttention::from_values(gv);
      if (ledger.total <= 0.0) continue;
      const double a = attention_score(ledger, g);
      double delta = 0.0;
      for (int i = 0; i < n; ++i) delta += std::max(0.0, l[i] - gv[i]);
      if (std::abs(a - (1.0 - delta / ledger.total)) > 1e-9) identity = false;
      if (a < 0.0 || a > 1.0 + 1e-12) bounds = false;
      // grow one exceeding entry at fixed zeta
      std::vector<double> bumped = l;
      const int s = static_cast<int>(rng.next() % n);
      if (bumped[s] <= gv[s]) bumped[s] = gv[s] + rng.uniform(0.0, 0.5);
      std::vector<double> bumped2 = bumped;
      bumped2[s] += rng.uniform(1e-6, 0.5);
      const AttentionLedger fixed1{bumped, ledger.total};
      const AttentionLedger fixed2{bumped2, ledger.total};
      if (attention_score(fixed2, g) > attention_score(fixed1, g) + 1e-12) monotone = false;
      // every entry above g: score must equal sum(g)/zeta
      std::vector<double> over(n);
      for (int i = 0; i < n; ++i) over[i] = gv[i] + rng.uniform(1e-6, 1.0);
      const AttentionLedger all_over = AttentionLedger::from_local(over);
      if (std::abs(attention_score(all_over, g) - g.optimal_length / all_over.total) > 1e-9)
        all_exceed = false;
    }
    check("attention score equals 1 - delta/zeta", identity, failures);
    check("attention score non-increasing in delta at fixed zeta", monotone, failures);
    check("attention score bounded in [0, 1]", bounds, failures);
    check("all-exceed attention score equals sum(g)/zeta", all_exceed, failures);
  }

  {  // normalized cumulative length reward peaks at Z
    auto peak = [](int z) {
      double best = -1e300;
      int best_j = 0;
      double cumulative = 0.0;
      for (int j = 1; j <= 3 * z + 2; ++j) {
        cumulative += step_length_reward(j, static_cast<double>(z));
        if (cumulative / j > best) {
          best = cumulative / j;
          best_j = j;
        }
      }
      return best_j;
    };
    bool ok = true;
    for (int z = 5; z <= 200; ++z) {
      if (std::abs(peak(z) - z) > 1) ok = false;
    }
    for (int z = 1; z <= 2; ++z) {
      if (std::abs(peak(z) - z) > 2) ok = false;
    }
    check("cumulative length reward peaks within +-1 of Z", ok, failures);
  }

  {  // beta = 0 reduces to the plain beam baseline with a = 1
    SyntheticSpec spec;
    spec.seed = 7;
    const SyntheticModel model = make_synthetic(spec);
    bool reduction = true, consistent = true, cost = true;
    for (int i = 0; i < 100; ++i) {
      const SyntheticInstance inst = model.make_instance(i);
      const GlobalAttention g =
          teacher_forced_global_attention(model, inst.source, inst.reference);
      ScorerConfig global_cfg;
      global_cfg.scorer = ScorerKind::Global;
      global_cfg.beta = 0.0;
      global_cfg.beam_size = 4;
      ScorerConfig beam_cfg = global_cfg;
      beam_cfg.scorer = ScorerKind::Beam;
      beam_cfg.a = 1.0;
      const DecodeResult lhs = beam_search(model, inst.source, g, global_cfg);
      const DecodeResult rhs = beam_search(model, inst.source, g, beam_cfg);
      if (lhs.best().hyp.tokens != rhs.best().hyp.tokens) reduction = false;
      for (const ScoredHypothesis& s : lhs.pool) {
        if (std::abs(recompute_joint(s.hyp, global_cfg) - s.hyp.joint) > 1e-9) consistent = false;
        if (std::abs(s.hyp.ledger.total - s.hyp.generated_length()) > 1e-9) consistent = false;
      }
      for (std::size_t step = 0; step + 1 < lhs.stats.attention_evals_per_step.size(); ++step) {
        if (lhs.stats.attention_evals_per_step[step] != global_cfg.beam_size) cost = false;
      }
    }
    check("beta=0 decode matches the beam baseline with a=1", reduction, failures);
    check("accumulated scores match recomputation; zeta equals length", consistent, failures);
    check("attention score evaluated K times per step", cost, failures);
  }

  {  // analytic gradient against central finite differences
    SyntheticSpec spec;
    spec.seed = 11;
    const SyntheticModel model = make_synthetic(spec);
    std::vector<TrainExample> examples;
    for (int i = 0; i < 20; ++i) {
      const SyntheticInstance inst = model.make_instance(1000 + i);
      examples.push_back(
          {inst.source, teacher_forced_global_attention(model, inst.source, inst.reference)});
    }
    PredictorParams params = init_predictor(examples, 0.05, 0, 3);
    bool ok = true;
    for (const TrainExample& ex : examples) {
      const PredictorGradient grad = loss_gradient(params, ex.source, ex.target);
      for (std::size_t k = 0; k < params.weights.size(); ++k) {
        const double h = 1e-6;
        PredictorParams hi = params, lo = params;
        hi.weights[k] += h;
        lo.weights[k] -= h;
        const double fd = (predictor_loss(predict(hi, ex.source).values, ex.target.values) -
                           predictor_loss(predict(lo, ex.source).values, ex.target.values)) /
                          (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad.d_weights[k]), 1e-8});
        if (std::abs(fd - grad.d_weights[k]) / denom > 1e-5) ok = false;
      }
    }
    check("predictor gradient matches finite differences", ok, failures);
  }

  std::printf("%s\n", failures == 0 ? "all checks passed" : "property failures detected");
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-calibrated beam search decoding engine"};
  app.require_subcommand(1);

  DecodeArgs args;
  std::vector<double> betas, gammas;
  std::vector<int> k_list;
  int l_max_flag = 0;
  int gen_count = 100;
  std::uint64_t gen_start = 0;
  std::string ref_path, hyp_path;
  double lr = 0.05;
  int epochs = 200;
  bool smooth = false;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--model", args.model_path, "model file (table fixture or synthetic spec)")
        ->required();
    cmd->add_option("--data", args.data_path, "instance JSONL file")->required();
    cmd->add_option("--beta", args.beta, "attention score weight");
    cmd->add_option("--gamma", args.gamma, "length reward weight");
    cmd->add_option("--beam-size", args.beam_size, "beam size K");
    cmd->add_option("--g-mode", args.g_mode, "oracle|predicted|provided|corrupted");
    cmd->add_option("--sigma", args.sigma, "corruption noise scale");
    cmd->add_option("--max-steps", args.max_steps, "step cap (default ceil(3Z))");
    cmd->add_option("--a", args.a, "length penalty exponent (beam baseline)");
    cmd->add_option("--repetition-theta", args.repetition_theta, "repetition penalty (>= 1)");
    cmd->add_option("--seed", args.seed, "run seed");
    cmd->add_option("--predictor", args.predictor_path, "predictor checkpoint for predicted mode");
    if (with_out) cmd->add_option("--out", args.out_path, "output JSONL file")->required();
  };

  CLI::App* decode = app.add_subcommand("decode", "decode a dataset");
  add_common(decode, true);
  decode->add_option("--scorer", args.scorer,
                     "beam|global|coverage-gnmt|coverage-trunc|coverage-step|bottom-up");
  decode->add_option("--block-length", args.block_length, "blocked decoding segment length");

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive-search decode");
  add_common(oracle, true);
  oracle->add_option("--scorer", args.scorer, "scoring objective");
  oracle->add_option("--l-max", args.l_max, "generation length bound")->required();

  CLI::App* train_cmd = app.add_subcommand("train-predictor", "fit the attention predictor");
  train_cmd->add_option("--data", args.data_path, "instance JSONL file")->required();
  train_cmd->add_option("--model", args.model_path, "model for teacher-forced targets");
  train_cmd->add_option("--lr", lr, "learning rate");
  train_cmd->add_option("--epochs", epochs, "training epochs");
  train_cmd->add_option("--seed", args.seed, "init seed");
  train_cmd->add_flag("--smooth-features", smooth, "neighbour-average features (window 3)");
  train_cmd->add_option("--out", args.out_path, "checkpoint file")->required();

  CLI::App* verify = app.add_subcommand("verify", "run the property suites");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score hypotheses against references");
  eval_cmd->add_option("--ref", ref_path, "instance JSONL with references")->required();
  eval_cmd->add_option("--hyp", hyp_path, "result JSONL")->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "beta/gamma grid search");
  add_common(sweep_cmd, false);
  sweep_cmd->add_option("--out", args.out_path, "experiment record JSONL");
  sweep_cmd->add_option("--betas", betas, "beta grid")->delimiter(',');
  sweep_cmd->add_option("--gammas", gammas, "gamma grid")->delimiter(',');

  CLI::App* degradation = app.add_subcommand("degradation", "metrics across beam sizes");
  add_common(degradation, false);
  degradation->add_option("--out", args.out_path, "experiment record JSONL");
  degradation->add_option("--k-list", k_list, "beam sizes")->delimiter(',');
  degradation->add_option("--l-max", l_max_flag, "enable the exhaustive row with this bound");

  CLI::App* gen = app.add_subcommand("gen-data", "write synthetic instances");
  gen->add_option("--model", args.model_path, "synthetic model file")->required();
  gen->add_option("--count", gen_count, "number of instances");
  gen->add_option("--start-index", gen_start, "first instance index");
  gen->add_option("--out", args.out_path, "instance JSONL file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (decode->parsed()) return run_decode(args, decode->count("--g-mode") > 0);
    if (oracle->parsed()) return run_oracle(args);
    if (train_cmd->parsed())
      return run_train_predictor(args.data_path, args.model_path, lr, epochs, args.seed, smooth,
                                 args.out_path);
    if (verify->parsed()) return run_verify();
    if (eval_cmd->parsed()) return run_eval(ref_path, hyp_path);
    if (sweep_cmd->parsed()) return run_sweep_cmd(args, betas, gammas);
    if (degradation->parsed()) return run_degradation_cmd(args, k_list, l_max_flag);
    if (gen->parsed()) return run_gen_data(args.model_path, gen_count, gen_start, args.out_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
