#include "gabs/predictor/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gabs/core/rng.hpp"
#include "json.hpp"

namespace gabs {

namespace {

double bias_at(const PredictorParams& params, std::size_t i) {
  return params.shared_bias ? params.bias.front() : params.bias[i];
}

std::vector<std::vector<double>> effective_features(const PredictorParams& params,
                                                    const SourceDocument& source) {
  if (!source.features) throw MissingFeaturesError("source document carries no features");
  const auto& raw = *source.features;
  for (const auto& e : raw) {
    if (static_cast<int>(e.size()) != params.feature_dim())
      throw DimensionMismatchError("feature dimension does not match the predictor weights");
  }
  if (!params.smooth_features) return raw;
  // Window-3 neighbour average, clipped at the edges.
  std::vector<std::vector<double>> mixed(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(raw.size() - 1, i + 1);
    mixed[i].assign(raw.front().size(), 0.0);
    for (std::size_t j = lo; j <= hi; ++j) {
      for (std::size_t k = 0; k < mixed[i].size(); ++k) mixed[i][k] += raw[j][k];
    }
    for (double& x : mixed[i]) x /= static_cast<double>(hi - lo + 1);
  }
  return mixed;
}

}  // namespace

void PredictorParams::validate() const {
  if (weights.empty()) throw InvalidInputError("predictor weights are empty");
  if (bias.empty()) throw InvalidInputError("predictor bias is empty");
  if (shared_bias && bias.size() != 1)
    throw InvalidInputError("shared bias must hold exactly one value");
  if (learning_rate < 0.0) throw InvalidInputError("learning rate must be >= 0");
  if (epochs < 0) throw InvalidInputError("epoch count must be >= 0");
}

PredictorParams init_predictor(std::span<const TrainExample> dataset, double learning_rate,
                               int epochs, std::uint64_t seed, bool smooth_features) {
  if (dataset.empty()) throw EmptyDatasetError("predictor initialization needs data");
  const auto& first = dataset.front().source;
  if (!first.features) throw MissingFeaturesError("dataset sources carry no features");
  const std::size_t d = first.features->front().size();
  bool uniform_length = true;
  for (const TrainExample& ex : dataset) {
    if (!ex.source.features) throw MissingFeaturesError("dataset sources carry no features");
    if (ex.source.size() != first.size()) uniform_length = false;
    if (ex.source.size() != ex.target.size())
      throw LengthMismatchError("target attention length does not match its source");
  }
  PredictorParams params;
  params.learning_rate = learning_rate;
  params.epochs = epochs;
  params.seed = seed;
  params.smooth_features = smooth_features;
  params.shared_bias = !uniform_length;
  params.bias.assign(params.shared_bias ? 1 : first.size(), 0.0);
  SplitMix64 rng(hash_combine(seed, 0x7072u));
  params.weights.resize(d);
  for (double& w : params.weights) w = 0.01 * rng.uniform(-1.0, 1.0);
  return params;
}

PredictedAttention predict(const PredictorParams& params, const SourceDocument& source) {
  params.validate();
  const auto features = effective_features(params, source);
  if (!params.shared_bias && params.bias.size() != features.size())
    throw DimensionMismatchError("per-position bias length does not match the source");
  PredictedAttention out;
  out.values.resize(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    double dot = bias_at(params, i);
    for (std::size_t k = 0; k < params.weights.size(); ++k)
      dot += params.weights[k] * features[i][k];
    out.values[i] = std::exp(dot);
    out.predicted_optimal_length += out.values[i];
  }
  return out;
}

double predictor_loss(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size())
    throw LengthMismatchError("prediction and target lengths differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

PredictorGradient loss_gradient(const PredictorParams& params, const SourceDocument& source,
                                const GlobalAttention& target) {
  const auto features = effective_features(params, source);
  const PredictedAttention predicted = predict(params, source);
  const double loss = predictor_loss(predicted.values, target.values);

  PredictorGradient grad;
  grad.d_weights.assign(params.weights.size(), 0.0);
  grad.d_bias.assign(params.bias.size(), 0.0);
  if (loss <= 0.0) return grad;  // flat at an exact fit
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double c = (predicted.values[i] - target.values[i]) * predicted.values[i] / loss;
    for (std::size_t k = 0; k < params.weights.size(); ++k)
      grad.d_weights[k] += c * features[i][k];
    grad.d_bias[params.shared_bias ? 0 : i] += c;
  }
  return grad;
}

double mean_loss(const PredictorParams& params, std::span<const TrainExample> dataset) {
  if (dataset.empty()) throw EmptyDatasetError("loss evaluation needs data");
  double total = 0.0;
  for (const TrainExample& ex : dataset) {
    total += predictor_loss(predict(params, ex.source).values, ex.target.values);
  }
  return total / static_cast<double>(dataset.size());
}

TrainResult train(PredictorParams params, std::span<const TrainExample> dataset) {
  params.validate();
  if (dataset.empty()) throw EmptyDatasetError("training needs a non-empty dataset");
  TrainResult result;
  const double scale = 1.0 / static_cast<double>(dataset.size());
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::vector<double> gw(params.weights.size(), 0.0);
    std::vector<double> gb(params.bias.size(), 0.0);
    double epoch_loss = 0.0;
    // Per-example gradients are summed in dataset order.
    for (const TrainExample& ex : dataset) {
      epoch_loss += predictor_loss(predict(params, ex.source).values, ex.target.values);
      const PredictorGradient g = loss_gradient(params, ex.source, ex.target);
      for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += g.d_weights[k];
      for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += g.d_bias[k];
    }
    result.loss_trajectory.push_back(epoch_loss * scale);
    // The per-example gradient norm does not vanish at the optimum, so the
    // step size decays linearly to zero over the run.
    const double lr =
        params.learning_rate * (1.0 - static_cast<double>(epoch) / params.epochs);
    for (std::size_t k = 0; k < gw.size(); ++k) params.weights[k] -= lr * gw[k] * scale;
    for (std::size_t k = 0; k < gb.size(); ++k) params.bias[k] -= lr * gb[k] * scale;
  }
  result.params = std::move(params);
  return result;
}

double r_squared(const PredictorParams& params, std::span<const TrainExample> dataset) {
  if (dataset.empty()) throw EmptyDatasetError("fit evaluation needs data");
  double total = 0.0;
  std::size_t counted = 0;
  for (const TrainExample& ex : dataset) {
    const PredictedAttention predicted = predict(params, ex.source);
    const auto& g = ex.target.values;
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ss_res += (g[i] - predicted.values[i]) * (g[i] - predicted.values[i]);
      ss_tot += (g[i] - mean) * (g[i] - mean);
    }
    if (ss_tot <= 1e-18) continue;  // constant target carries no signal
    total += 1.0 - ss_res / ss_tot;
    ++counted;
  }
  if (counted == 0) throw EmptyDatasetError("no example with target variance");
  return total / static_cast<double>(counted);
}

GlobalAttention corrupt(const GlobalAttention& g, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidInputError("sigma must be >= 0");
  constexpr double kFloor = 1e-6;
  const double mean =
      g.values.empty() ? 0.0 : g.optimal_length / static_cast<double>(g.values.size());
  SplitMix64 rng(hash_combine(seed, 0x636fu));
  std::vector<double> corrupted(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    corrupted[i] = std::max(g.values[i] + sigma * mean * rng.normal(), kFloor);
  }
  return GlobalAttention::from_values(std::move(corrupted));
}

std::string checkpoint_to_json(const PredictorParams& params) {
  nlohmann::json j;
  j["W"] = params.weights;
  j["b"] = params.bias;
  j["d"] = params.feature_dim();
  j["meta"] = {{"shared_bias", params.shared_bias},
               {"smooth_features", params.smooth_features},
               {"learning_rate", params.learning_rate},
               {"epochs", params.epochs},
               {"seed", params.seed}};
  return j.dump();
}

PredictorParams checkpoint_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    PredictorParams params;
    params.weights = j.at("W").get<std::vector<double>>();
    params.bias = j.at("b").get<std::vector<double>>();
    if (j.at("d").get<int>() != params.feature_dim())
      throw DimensionMismatchError("checkpoint dimension disagrees with its weights");
    const auto& meta = j.at("meta");
    params.shared_bias = meta.value("shared_bias", params.bias.size() == 1);
    params.smooth_features = meta.value("smooth_features", false);
    params.learning_rate = meta.value("learning_rate", 0.05);
    params.epochs = meta.value("epochs", 0);
    params.seed = meta.value("seed", std::uint64_t{0});
    params.validate();
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad checkpoint json: ") + e.what());
  }
}

void save_checkpoint(const PredictorParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write checkpoint file: " + path);
  out << checkpoint_to_json(params) << "\n";
}

PredictorParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open checkpoint file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace gabs
