#ifndef GABS_MODEL_MODEL_HPP
#define GABS_MODEL_MODEL_HPP

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gabs/core/attention.hpp"
#include "gabs/core/types.hpp"

namespace gabs {

// One autoregressive step: a log-probability vector over the vocabulary plus
// the cross-attention row the step pays to the source tokens.
struct StepOutput {
  std::vector<double> logprobs;
  std::vector<double> attention;

  // Checks that exp(logprobs) sums to 1 within 1e-6 and that the attention
  // row is a valid distribution.
  void validate() const;

  bool operator==(const StepOutput&) const = default;
};

// Contract for attentive autoregressive models. Implementations must be
// deterministic: repeated calls with the same arguments agree bit-exactly.
// Models are immutable after construction and safe to step concurrently.
class Model {
 public:
  virtual ~Model() = default;

  virtual int vocab_size() const = 0;
  virtual int source_len() const = 0;

  // End-of-sequence id; by convention the last vocabulary id.
  virtual TokenId eos_token() const { return vocab_size() - 1; }
  // Fixed decoder start token. It contributes no probability factor and no
  // attention row; the end-of-sequence id is reused for it.
  virtual TokenId start_token() const { return eos_token(); }

  // Longest generated prefix the model accepts, when declared.
  virtual std::optional<int> horizon() const { return std::nullopt; }

  // prefix must begin with the start token. Throws PrefixTooLongError when
  // the generated part exceeds the declared horizon.
  StepOutput step(const SourceDocument& source, std::span<const TokenId> prefix) const;

 protected:
  virtual StepOutput do_step(const SourceDocument& source,
                             std::span<const TokenId> generated) const = 0;
};

// Finite lookup model: maps generated prefixes to fixed step outputs, with a
// default entry for unlisted prefixes so lookup is total.
class TableModel : public Model {
 public:
  using EntryMap = std::map<std::vector<TokenId>, StepOutput>;

  TableModel(int vocab_size, int source_len, EntryMap entries, StepOutput default_entry,
             std::optional<int> horizon = std::nullopt);

  // Parses the fixture format:
  //   {"vocab_size": N, "source_len": M,
  //    "entries": [{"prefix": [..], "p": [..], "att": [..]}, ...],
  //    "default": {"p": [..], "att": [..]}}
  // where "p" holds probabilities (logs are taken on load).
  static TableModel from_json_text(const std::string& text);
  static TableModel load(const std::string& path);

  int vocab_size() const override { return vocab_size_; }
  int source_len() const override { return source_len_; }
  std::optional<int> horizon() const override { return horizon_; }

 protected:
  StepOutput do_step(const SourceDocument& source,
                     std::span<const TokenId> generated) const override;

 private:
  int vocab_size_;
  int source_len_;
  EntryMap entries_;
  StepOutput default_entry_;
  std::optional<int> horizon_;
};

// Runs the model over the reference under teacher forcing and accumulates the
// cross-attention rows into a global attention distribution with Z == |reference|.
// The reference excludes the start token and must end with end-of-sequence.
GlobalAttention teacher_forced_global_attention(const Model& model, const SourceDocument& source,
                                                std::span<const TokenId> reference);

// Same accumulation over an arbitrary target prefix (no end-of-sequence
// requirement); used to build per-segment distributions for blocked decoding.
GlobalAttention accumulate_target_attention(const Model& model, const SourceDocument& source,
                                            std::span<const TokenId> target);

}  // namespace gabs

#endif  // GABS_MODEL_MODEL_HPP
