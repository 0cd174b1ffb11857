#ifndef GABS_EVAL_HARNESS_HPP
#define GABS_EVAL_HARNESS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gabs/io/records.hpp"
#include "gabs/predictor/predictor.hpp"
#include "gabs/search/beam.hpp"
#include "gabs/search/oracle.hpp"

namespace gabs {

struct HarnessOptions {
  ScorerConfig config;
  GMode g_mode = GMode::Oracle;
  double sigma = 0.0;
  std::optional<PredictorParams> predictor;
  // When set, the degradation harness adds an exhaustive-search row with this
  // generation bound and caps decoding at the same number of steps so every
  // decoded hypothesis lies inside the enumerated space.
  std::optional<int> oracle_l_max;
};

// Builds the global attention distribution for one instance: teacher forcing
// for oracle (falling back to a stored distribution), the stored distribution
// for provided, the trained head for predicted, and seeded noise on top of
// the oracle distribution for corrupted.
GlobalAttention resolve_global_attention(const Model& model, const Instance& instance, GMode mode,
                                         double sigma, std::uint64_t seed,
                                         const PredictorParams* predictor);

ResultRecord make_result_record(const Instance& instance, const DecodeResult& result,
                                const GlobalAttention& g);

struct AggregateMetrics {
  int count = 0;
  double mean_final_score = 0.0;
  double mean_length = 0.0;
  double mean_abs_length_deviation = 0.0;
  double mean_attention_product = 0.0;
  int forced_count = 0;
  std::optional<double> mean_rouge1_f;
  std::optional<double> mean_rouge2_f;
  std::optional<double> mean_rougeL_f;
};

AggregateMetrics aggregate_metrics(std::span<const ExperimentRecord> records,
                                   std::span<const Instance> instances);

struct SweepCell {
  double beta = 0.0;
  double gamma = 0.0;
  AggregateMetrics metrics;
};

struct SweepTable {
  std::vector<SweepCell> cells;
  std::vector<ExperimentRecord> records;
};

// Decodes the dataset once per (beta, gamma) grid point.
SweepTable run_sweep(const Model& model, std::span<const Instance> instances,
                     std::span<const double> betas, std::span<const double> gammas,
                     const HarnessOptions& options);

// Default grids for the sweep.
std::vector<double> default_beta_grid();   // {2, 4, 6, 10, 12, 15, 18, 20}
std::vector<double> default_gamma_grid();  // {0, 0.5, 1, 1.5, 2}

struct DegradationRow {
  std::string mode;   // beam | global-oracle | global-predicted | exhaustive
  int beam_size = 0;  // 0 for the exhaustive row
  AggregateMetrics metrics;
  // Best naturally finished hypothesis of each instance rescored under the
  // joint objective with the oracle distribution; NaN when none finished
  // naturally.
  std::vector<double> per_instance_objective;
};

struct DegradationTable {
  std::vector<DegradationRow> rows;
  std::vector<ExperimentRecord> records;
};

// Decodes the dataset for every beam size with the beam baseline and the
// calibrated scorer (oracle and, when a predictor is available, predicted
// distributions), plus one exhaustive row when oracle_l_max is set.
DegradationTable run_degradation(const Model& model, std::span<const Instance> instances,
                                 std::span<const int> beam_sizes, const HarnessOptions& options);

}  // namespace gabs

#endif  // GABS_EVAL_HARNESS_HPP
