#include "gabs/model/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gabs {

void StepOutput::validate() const {
  if (logprobs.empty()) throw InvalidInputError("step output has no log-probabilities");
  double sum = 0.0;
  for (double lp : logprobs) sum += std::exp(lp);
  if (std::abs(sum - 1.0) > kDistributionTolerance) throw NotNormalizedError(sum);
  validate_distribution(attention);
}

StepOutput Model::step(const SourceDocument& source, std::span<const TokenId> prefix) const {
  if (prefix.empty() || prefix.front() != start_token())
    throw InvalidInputError("prefix must begin with the start token");
  const auto generated = prefix.subspan(1);
  if (horizon() && static_cast<int>(generated.size()) > *horizon())
    throw PrefixTooLongError("prefix exceeds the model horizon");
  return do_step(source, generated);
}

TableModel::TableModel(int vocab_size, int source_len, EntryMap entries, StepOutput default_entry,
                       std::optional<int> horizon)
    : vocab_size_(vocab_size),
      source_len_(source_len),
      entries_(std::move(entries)),
      default_entry_(std::move(default_entry)),
      horizon_(horizon) {
  if (vocab_size_ < 1) throw InvalidSpecError("table model needs a non-empty vocabulary");
  if (source_len_ < 1) throw InvalidSpecError("table model needs a non-empty source");
  auto check = [&](const StepOutput& out) {
    if (static_cast<int>(out.logprobs.size()) != vocab_size_)
      throw LengthMismatchError("table entry log-probabilities must cover the vocabulary");
    if (static_cast<int>(out.attention.size()) != source_len_)
      throw LengthMismatchError("table entry attention must cover the source");
    out.validate();
  };
  check(default_entry_);
  for (const auto& [prefix, out] : entries_) check(out);
}

StepOutput TableModel::do_step(const SourceDocument& source,
                               std::span<const TokenId> generated) const {
  if (static_cast<int>(source.size()) != source_len_)
    throw LengthMismatchError("source length does not match the table model");
  const std::vector<TokenId> key(generated.begin(), generated.end());
  auto it = entries_.find(key);
  return it != entries_.end() ? it->second : default_entry_;
}

namespace {

StepOutput entry_from_json(const nlohmann::json& j) {
  StepOutput out;
  for (double p : j.at("p").get<std::vector<double>>()) out.logprobs.push_back(std::log(p));
  out.attention = j.at("att").get<std::vector<double>>();
  return out;
}

}  // namespace

TableModel TableModel::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad model json: ") + e.what());
  }
  try {
    EntryMap entries;
    for (const auto& e : j.at("entries")) {
      entries[e.at("prefix").get<std::vector<TokenId>>()] = entry_from_json(e);
    }
    return TableModel(j.at("vocab_size").get<int>(), j.at("source_len").get<int>(),
                      std::move(entries), entry_from_json(j.at("default")));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad model json: ") + e.what());
  }
}

TableModel TableModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

GlobalAttention accumulate_target_attention(const Model& model, const SourceDocument& source,
                                            std::span<const TokenId> target) {
  std::vector<double> g(source.size(), 0.0);
  std::vector<TokenId> prefix;
  prefix.reserve(target.size() + 1);
  prefix.push_back(model.start_token());
  for (std::size_t t = 0; t < target.size(); ++t) {
    const StepOutput out = model.step(source, prefix);
    if (out.attention.size() != g.size())
      throw LengthMismatchError("attention row length does not match the source");
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.attention[i];
    prefix.push_back(target[t]);
  }
  return GlobalAttention::from_values(std::move(g));
}

GlobalAttention teacher_forced_global_attention(const Model& model, const SourceDocument& source,
                                                std::span<const TokenId> reference) {
  if (reference.empty()) throw InvalidInputError("reference must contain at least one token");
  if (reference.back() != model.eos_token())
    throw InvalidInputError("reference must end with the end-of-sequence token");
  return accumulate_target_attention(model, source, reference);
}

}  // namespace gabs
