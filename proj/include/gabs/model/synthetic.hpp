#ifndef GABS_MODEL_SYNTHETIC_HPP
#define GABS_MODEL_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "gabs/model/model.hpp"

namespace gabs {

// Parameters of the seeded synthetic model family. Identical specs produce
// bit-identical models.
struct SyntheticSpec {
  std::uint64_t seed = 0;
  int vocab_size = 12;
  int source_len = 8;
  int feature_dim = 4;
  // 1.0 makes every attention row follow the per-token salience exactly;
  // lower values add prefix-dependent jitter.
  double attention_smoothness = 0.92;
  // Scale of the next-token logits; larger values give peakier distributions.
  double logit_scale = 1.5;
  // End-of-sequence logit: eos_bias + eos_ramp * (t - sum of salience), so
  // stopping becomes likely once the generated length approaches the source's
  // content mass.
  double eos_bias = 0.0;
  double eos_ramp = 0.9;

  void validate() const;

  bool operator==(const SyntheticSpec&) const = default;
};

// Generated (source, reference) pair. Sources carry feature vectors, and the
// per-token salience exp(w . e_i) that drives the attention rows is a smooth
// deterministic function of those features, which makes the attention
// predictor learnable on this family.
struct SyntheticInstance {
  SourceDocument source;
  std::vector<TokenId> reference;  // ends with end-of-sequence
};

class SyntheticModel : public Model {
 public:
  explicit SyntheticModel(SyntheticSpec spec);

  int vocab_size() const override { return spec_.vocab_size; }
  int source_len() const override { return spec_.source_len; }
  const SyntheticSpec& spec() const { return spec_; }

  SourceDocument make_source(std::uint64_t instance) const;
  SyntheticInstance make_instance(std::uint64_t instance) const;

 protected:
  StepOutput do_step(const SourceDocument& source,
                     std::span<const TokenId> generated) const override;

 private:
  // exp(w . e_i) per source token; uniform when the source has no features.
  std::vector<double> salience(const SourceDocument& source) const;

  SyntheticSpec spec_;
  std::vector<double> weights_;  // hidden salience weights, drawn from the seed
};

SyntheticModel make_synthetic(const SyntheticSpec& spec);

}  // namespace gabs

#endif  // GABS_MODEL_SYNTHETIC_HPP
