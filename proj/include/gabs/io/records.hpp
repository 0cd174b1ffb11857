#ifndef GABS_IO_RECORDS_HPP
#define GABS_IO_RECORDS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gabs/core/types.hpp"
#include "gabs/model/model.hpp"

namespace gabs {

// One dataset line: a source document plus whatever supervision it carries.
struct Instance {
  std::string id;
  SourceDocument source;
  std::optional<std::vector<TokenId>> reference;
  std::optional<GlobalAttention> global_attention;

  bool operator==(const Instance&) const = default;
};

// One decode output line.
struct ResultRecord {
  std::string id;
  std::vector<TokenId> hypothesis;  // generated tokens, end-of-sequence included
  double final_score = 0.0;
  double attention_score = 0.0;  // terminal attention score against g
  int length = 0;                // generated length (== |hypothesis|)
  double z = 0.0;
  bool forced = false;

  bool operator==(const ResultRecord&) const = default;
};

// How the global attention distribution is obtained for an instance.
enum class GMode { Oracle, Predicted, Provided, Corrupted };

std::string to_string(GMode mode);
GMode g_mode_from_string(const std::string& name);

// One harness decode with full provenance; serializes losslessly.
struct ExperimentRecord {
  std::string id;
  ScorerConfig config;
  GMode g_mode = GMode::Oracle;
  double sigma = 0.0;
  std::vector<TokenId> hypothesis;
  double final_score = 0.0;
  double attention_product = 0.0;  // product of per-step attention scores
  int length = 0;
  double z = 0.0;
  bool forced = false;
  double wall_ms = 0.0;

  bool operator==(const ExperimentRecord&) const = default;
};

std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& line);
std::vector<Instance> load_instances(const std::string& path);
void save_instances(const std::vector<Instance>& instances, const std::string& path);

std::string result_to_json(const ResultRecord& record);
ResultRecord result_from_json(const std::string& line);
std::vector<ResultRecord> load_results(const std::string& path);
void save_results(const std::vector<ResultRecord>& records, const std::string& path);

std::string experiment_to_json(const ExperimentRecord& record);
ExperimentRecord experiment_from_json(const std::string& line);
void save_experiments(const std::vector<ExperimentRecord>& records, const std::string& path);

// One trace line per decoding step: the frontier sequences with their
// accumulated scores plus the finished-pool size.
struct BeamSnapshot;
std::string snapshot_to_json(const BeamSnapshot& snapshot);

// Model files: the table fixture format, or {"synthetic": {...}}.
std::unique_ptr<Model> load_model(const std::string& path);

}  // namespace gabs

#endif  // GABS_IO_RECORDS_HPP
