#include "gabs/model/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "gabs/core/rng.hpp"

namespace gabs {

namespace {

constexpr std::uint64_t kWeightsTag = 0x5741;   // weight stream
constexpr std::uint64_t kFeatureTag = 0x4645;   // feature stream
constexpr std::uint64_t kTokenTag = 0x544f;     // source token stream
constexpr std::uint64_t kRefTag = 0x5245;       // reference token stream
constexpr std::uint64_t kLogitTag = 0x4c4f;     // per-step logit stream
constexpr std::uint64_t kRowTag = 0x4154;       // per-step attention stream

double log_sum_exp(const std::vector<double>& v) {
  double m = v.front();
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (vocab_size < 2) throw InvalidSpecError("synthetic vocabulary needs >= 2 tokens");
  if (source_len < 1) throw InvalidSpecError("synthetic source length must be >= 1");
  if (feature_dim < 1) throw InvalidSpecError("synthetic feature dimension must be >= 1");
  if (attention_smoothness < 0.0 || attention_smoothness > 1.0)
    throw InvalidSpecError("attention smoothness must lie in [0, 1]");
  if (logit_scale < 0.0) throw InvalidSpecError("logit scale must be >= 0");
}

SyntheticModel::SyntheticModel(SyntheticSpec spec) : spec_(spec) {
  spec_.validate();
  SplitMix64 rng(hash_combine(spec_.seed, kWeightsTag));
  weights_.resize(spec_.feature_dim);
  // Fixed-norm salience weights keep the family's fit difficulty stable
  // across seeds.
  double norm = 0.0;
  for (double& w : weights_) {
    w = rng.uniform(-1.0, 1.0);
    norm += w * w;
  }
  norm = std::sqrt(norm);
  const double target = norm > 0.0 ? 1.25 / norm : 0.0;
  for (double& w : weights_) w *= target;
}

SyntheticModel make_synthetic(const SyntheticSpec& spec) { return SyntheticModel(spec); }

SourceDocument SyntheticModel::make_source(std::uint64_t instance) const {
  SourceDocument doc;
  doc.tokens.resize(spec_.source_len);
  const int content = spec_.vocab_size - 1;
  for (int i = 0; i < spec_.source_len; ++i) {
    SplitMix64 rng(hash_combine(hash_combine(spec_.seed, kTokenTag),
                                hash_combine(instance, static_cast<std::uint64_t>(i))));
    doc.tokens[i] = static_cast<TokenId>(rng.next() % static_cast<std::uint64_t>(content));
  }
  std::vector<std::vector<double>> features(spec_.source_len);
  for (int i = 0; i < spec_.source_len; ++i) {
    SplitMix64 rng(hash_combine(hash_combine(spec_.seed, kFeatureTag),
                                hash_combine(instance, static_cast<std::uint64_t>(i))));
    features[i].resize(spec_.feature_dim);
    for (double& f : features[i]) f = rng.uniform(-1.0, 1.0);
  }
  doc.features = std::move(features);
  return doc;
}

SyntheticInstance SyntheticModel::make_instance(std::uint64_t instance) const {
  SyntheticInstance out;
  out.source = make_source(instance);
  const std::vector<double> sal = salience(out.source);
  double z = 0.0;
  for (double s : sal) z += s;
  const int length = std::max(1, static_cast<int>(std::llround(z)));
  const int content = spec_.vocab_size - 1;
  out.reference.resize(length);
  for (int t = 0; t + 1 < length; ++t) {
    SplitMix64 rng(hash_combine(hash_combine(spec_.seed, kRefTag),
                                hash_combine(instance, static_cast<std::uint64_t>(t))));
    out.reference[t] = static_cast<TokenId>(rng.next() % static_cast<std::uint64_t>(content));
  }
  out.reference[length - 1] = eos_token();
  return out;
}

std::vector<double> SyntheticModel::salience(const SourceDocument& source) const {
  std::vector<double> sal(source.size(), 1.0);
  if (!source.features) return sal;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto& e = (*source.features)[i];
    if (e.size() != weights_.size())
      throw DimensionMismatchError("source feature dimension does not match the model");
    double dot = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) dot += weights_[k] * e[k];
    sal[i] = std::exp(dot);
  }
  return sal;
}

StepOutput SyntheticModel::do_step(const SourceDocument& source,
                                   std::span<const TokenId> generated) const {
  const std::uint64_t src_hash = hash_span<TokenId>(hash_combine(spec_.seed, 0x53u),
                                                    {source.tokens.data(), source.tokens.size()});
  const std::uint64_t ctx = hash_span<TokenId>(src_hash, generated);
  const std::vector<double> sal = salience(source);
  double content_mass = 0.0;
  for (double s : sal) content_mass += s;

  StepOutput out;
  out.logprobs.resize(spec_.vocab_size);
  {
    SplitMix64 rng(hash_combine(ctx, kLogitTag));
    for (int v = 0; v < spec_.vocab_size; ++v) {
      out.logprobs[v] = spec_.logit_scale * rng.normal();
    }
    const double t = static_cast<double>(generated.size()) + 1.0;
    out.logprobs[eos_token()] += spec_.eos_bias + spec_.eos_ramp * (t - content_mass);
    const double lse = log_sum_exp(out.logprobs);
    for (double& lp : out.logprobs) lp -= lse;
  }

  out.attention.resize(source.size());
  {
    SplitMix64 rng(hash_combine(ctx, kRowTag));
    const double jitter = 1.0 - spec_.attention_smoothness;
    double sum = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      out.attention[i] = sal[i] * std::exp(jitter * rng.normal());
      sum += out.attention[i];
    }
    for (double& a : out.attention) a /= sum;
  }
  return out;
}

}  // namespace gabs
