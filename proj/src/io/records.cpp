#include "gabs/io/records.hpp"

#include <fstream>
#include <sstream>

#include "gabs/model/synthetic.hpp"
#include "gabs/search/beam.hpp"
#include "json.hpp"

namespace gabs {

namespace {

using nlohmann::json;

json config_to_json(const ScorerConfig& c) {
  json j;
  j["scorer"] = to_string(c.scorer);
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["a"] = c.a;
  j["beam_size"] = c.beam_size;
  j["repetition_theta"] = c.repetition_theta ? json(*c.repetition_theta) : json(nullptr);
  j["block_length"] = c.block_length ? json(*c.block_length) : json(nullptr);
  j["max_steps"] = c.max_steps ? json(*c.max_steps) : json(nullptr);
  j["min_length"] = c.min_length ? json(*c.min_length) : json(nullptr);
  j["max_length"] = c.max_length ? json(*c.max_length) : json(nullptr);
  j["attention_floor"] = c.attention_floor;
  j["seed"] = c.seed;
  j["coverage_g_thresholds"] = c.coverage_g_thresholds;
  return j;
}

ScorerConfig config_from_json(const json& j) {
  ScorerConfig c;
  c.scorer = scorer_kind_from_string(j.at("scorer").get<std::string>());
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.a = j.at("a").get<double>();
  c.beam_size = j.at("beam_size").get<int>();
  if (!j.at("repetition_theta").is_null()) c.repetition_theta = j.at("repetition_theta").get<double>();
  if (!j.at("block_length").is_null()) c.block_length = j.at("block_length").get<int>();
  if (!j.at("max_steps").is_null()) c.max_steps = j.at("max_steps").get<int>();
  if (!j.at("min_length").is_null()) c.min_length = j.at("min_length").get<int>();
  if (!j.at("max_length").is_null()) c.max_length = j.at("max_length").get<int>();
  c.attention_floor = j.at("attention_floor").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.coverage_g_thresholds = j.at("coverage_g_thresholds").get<bool>();
  return c;
}

template <typename T>
std::vector<T> load_lines(const std::string& path, T (*parse)(const std::string&)) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open file: " + path);
  std::vector<T> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse(line));
  }
  return out;
}

template <typename T>
void save_lines(const std::vector<T>& items, const std::string& path,
                std::string (*dump)(const T&)) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write file: " + path);
  for (const T& item : items) out << dump(item) << "\n";
}

}  // namespace

std::string to_string(GMode mode) {
  switch (mode) {
    case GMode::Oracle: return "oracle";
    case GMode::Predicted: return "predicted";
    case GMode::Provided: return "provided";
    case GMode::Corrupted: return "corrupted";
  }
  throw InvalidInputError("unknown g-mode");
}

GMode g_mode_from_string(const std::string& name) {
  if (name == "oracle") return GMode::Oracle;
  if (name == "predicted") return GMode::Predicted;
  if (name == "provided") return GMode::Provided;
  if (name == "corrupted") return GMode::Corrupted;
  throw InvalidInputError("unknown g-mode: " + name);
}

std::string instance_to_json(const Instance& instance) {
  json j;
  j["id"] = instance.id;
  j["source"] = instance.source.tokens;
  if (instance.source.features) j["features"] = *instance.source.features;
  if (instance.reference) j["reference"] = *instance.reference;
  if (instance.global_attention) j["global_attention"] = instance.global_attention->values;
  return j.dump();
}

Instance instance_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    Instance instance;
    instance.id = j.at("id").get<std::string>();
    instance.source.tokens = j.at("source").get<std::vector<TokenId>>();
    if (j.contains("features") && !j.at("features").is_null())
      instance.source.features = j.at("features").get<std::vector<std::vector<double>>>();
    if (j.contains("reference") && !j.at("reference").is_null())
      instance.reference = j.at("reference").get<std::vector<TokenId>>();
    if (j.contains("global_attention") && !j.at("global_attention").is_null())
      instance.global_attention =
          GlobalAttention::from_values(j.at("global_attention").get<std::vector<double>>());
    instance.source.validate();
    return instance;
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("bad instance json: ") + e.what());
  }
}

std::vector<Instance> load_instances(const std::string& path) {
  return load_lines<Instance>(path, instance_from_json);
}

void save_instances(const std::vector<Instance>& instances, const std::string& path) {
  save_lines<Instance>(instances, path, instance_to_json);
}

std::string result_to_json(const ResultRecord& r) {
  json j;
  j["id"] = r.id;
  j["hypothesis"] = r.hypothesis;
  j["final_score"] = r.final_score;
  j["attention_score"] = r.attention_score;
  j["length"] = r.length;
  j["Z"] = r.z;
  j["forced"] = r.forced;
  return j.dump();
}

ResultRecord result_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    ResultRecord r;
    r.id = j.at("id").get<std::string>();
    r.hypothesis = j.at("hypothesis").get<std::vector<TokenId>>();
    r.final_score = j.at("final_score").get<double>();
    r.attention_score = j.at("attention_score").get<double>();
    r.length = j.at("length").get<int>();
    r.z = j.at("Z").get<double>();
    r.forced = j.at("forced").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("bad result json: ") + e.what());
  }
}

std::vector<ResultRecord> load_results(const std::string& path) {
  return load_lines<ResultRecord>(path, result_from_json);
}

void save_results(const std::vector<ResultRecord>& records, const std::string& path) {
  save_lines<ResultRecord>(records, path, result_to_json);
}

std::string experiment_to_json(const ExperimentRecord& r) {
  json j;
  j["id"] = r.id;
  j["config"] = config_to_json(r.config);
  j["g_mode"] = to_string(r.g_mode);
  j["sigma"] = r.sigma;
  j["hypothesis"] = r.hypothesis;
  j["final_score"] = r.final_score;
  j["attention_product"] = r.attention_product;
  j["length"] = r.length;
  j["Z"] = r.z;
  j["forced"] = r.forced;
  j["wall_ms"] = r.wall_ms;
  return j.dump();
}

ExperimentRecord experiment_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    ExperimentRecord r;
    r.id = j.at("id").get<std::string>();
    r.config = config_from_json(j.at("config"));
    r.g_mode = g_mode_from_string(j.at("g_mode").get<std::string>());
    r.sigma = j.at("sigma").get<double>();
    r.hypothesis = j.at("hypothesis").get<std::vector<TokenId>>();
    r.final_score = j.at("final_score").get<double>();
    r.attention_product = j.at("attention_product").get<double>();
    r.length = j.at("length").get<int>();
    r.z = j.at("Z").get<double>();
    r.forced = j.at("forced").get<bool>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("bad experiment json: ") + e.what());
  }
}

void save_experiments(const std::vector<ExperimentRecord>& records, const std::string& path) {
  save_lines<ExperimentRecord>(records, path, experiment_to_json);
}

std::string snapshot_to_json(const BeamSnapshot& snapshot) {
  json beams = json::array();
  for (const Hypothesis& h : snapshot.frontier) {
    beams.push_back({{"tokens", h.tokens},
                     {"logprob", h.logprob},
                     {"joint", h.joint},
                     {"zeta", h.ledger.total}});
  }
  return json{{"step", snapshot.step}, {"beams", beams}, {"pool_size", snapshot.pool_size}}
      .dump();
}

std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("bad model json: ") + e.what());
  }
  if (j.contains("entries")) return std::make_unique<TableModel>(TableModel::from_json_text(text));
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    SyntheticSpec spec;
    spec.seed = s.value("seed", std::uint64_t{0});
    spec.vocab_size = s.value("vocab_size", spec.vocab_size);
    spec.source_len = s.value("source_len", spec.source_len);
    spec.feature_dim = s.value("feature_dim", spec.feature_dim);
    spec.attention_smoothness = s.value("attention_smoothness", spec.attention_smoothness);
    spec.logit_scale = s.value("logit_scale", spec.logit_scale);
    spec.eos_bias = s.value("eos_bias", spec.eos_bias);
    spec.eos_ramp = s.value("eos_ramp", spec.eos_ramp);
    return std::make_unique<SyntheticModel>(make_synthetic(spec));
  }
  throw InvalidInputError("model file must hold a prefix table or a synthetic spec");
}

}  // namespace gabs
