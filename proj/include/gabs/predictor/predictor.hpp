#ifndef GABS_PREDICTOR_PREDICTOR_HPP
#define GABS_PREDICTOR_PREDICTOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gabs/core/types.hpp"

namespace gabs {

// Linear head with an exponential activation over per-token source features:
// ghat_i = exp(w . e_i + b_i). The bias is per-position when every source in
// the dataset has the same length, otherwise a single shared scalar.
struct PredictorParams {
  std::vector<double> weights;  // dimension d
  std::vector<double> bias;     // length n, or length 1 when shared
  bool shared_bias = false;
  // Replace each feature vector by the mean over a 3-token window before the
  // linear head, mixing neighbour context into the prediction.
  bool smooth_features = false;
  double learning_rate = 0.05;
  int epochs = 200;
  std::uint64_t seed = 0;

  int feature_dim() const { return static_cast<int>(weights.size()); }
  void validate() const;

  bool operator==(const PredictorParams&) const = default;
};

// Strictly positive predicted global attention and its sum.
struct PredictedAttention {
  std::vector<double> values;
  double predicted_optimal_length = 0.0;

  GlobalAttention as_global() const { return {values, predicted_optimal_length}; }
};

struct TrainExample {
  SourceDocument source;
  GlobalAttention target;
};

struct TrainResult {
  PredictorParams params;
  // Mean dataset loss at the start of each epoch.
  std::vector<double> loss_trajectory;
};

struct PredictorGradient {
  std::vector<double> d_weights;
  std::vector<double> d_bias;
};

// Seeds fresh parameters for a dataset: weights get small random values and
// the bias layout follows the source lengths (per-position iff uniform).
PredictorParams init_predictor(std::span<const TrainExample> dataset, double learning_rate,
                               int epochs, std::uint64_t seed, bool smooth_features = false);

PredictedAttention predict(const PredictorParams& params, const SourceDocument& source);

// Euclidean distance between predicted and target attention.
double predictor_loss(std::span<const double> predicted, std::span<const double> target);

// Analytic gradient of the Euclidean loss for one example.
PredictorGradient loss_gradient(const PredictorParams& params, const SourceDocument& source,
                                const GlobalAttention& target);

// Full-batch gradient descent for the configured number of epochs.
TrainResult train(PredictorParams params, std::span<const TrainExample> dataset);

double mean_loss(const PredictorParams& params, std::span<const TrainExample> dataset);

// Mean per-example coefficient of determination of the predictions.
double r_squared(const PredictorParams& params, std::span<const TrainExample> dataset);

// Additive Gaussian corruption g_i' = max(g_i + sigma * mean(g) * eta_i, 1e-6)
// with seeded standard normal eta; Z is recomputed from the corrupted values.
GlobalAttention corrupt(const GlobalAttention& g, double sigma, std::uint64_t seed);

// Checkpoint I/O: {"W": [...], "b": [...], "d": int, "meta": {...}}.
std::string checkpoint_to_json(const PredictorParams& params);
PredictorParams checkpoint_from_json(const std::string& text);
void save_checkpoint(const PredictorParams& params, const std::string& path);
PredictorParams load_checkpoint(const std::string& path);

}  // namespace gabs

#endif  // GABS_PREDICTOR_PREDICTOR_HPP
