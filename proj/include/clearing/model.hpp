#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "clearing/execution.hpp"
#include "clearing/features.hpp"
#include "clearing/losses.hpp"

namespace clearing {

/// Linear pricing policy p(z) = w . z + bias.
struct PricingModel {
  std::vector<double> weights;
  double bias = 0.0;

  static PricingModel zeros(std::size_t dimension) { return {std::vector<double>(dimension), 0.0}; }
  static PricingModel constant(std::size_t dimension, double price) {
    return {std::vector<double>(dimension), price};
  }
  std::size_t dimension() const { return weights.size(); }

  friend bool operator==(const PricingModel&, const PricingModel&) = default;
};

/// Throws DimensionMismatch when z and the model disagree.
double predict(const PricingModel& model, const FeatureVector& z);

/// predict() without the dimension check; callers validate up front.
inline double predict_unchecked(const PricingModel& model, const FeatureVector& z) {
  double p = model.bias;
  for (const auto& e : z.entries()) p += model.weights[e.index] * e.value;
  return p;
}

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Adam moments for weights followed by the bias (slot `dimension`).
/// Entries of features absent from a step are decayed lazily on their next
/// touch, so moments match dense Adam and absent weights stay put.
class OptimizerState {
 public:
  OptimizerState() = default;
  OptimizerState(std::size_t dimension, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_count_; }
  std::size_t dimension() const { return first_.empty() ? 0 : first_.size() - 1; }

  /// Moments as dense Adam would hold them after step_count() steps.
  std::vector<double> first_moment() const;
  std::vector<double> second_moment() const;

  /// One update. `indices` are weight slots (strictly increasing) with
  /// matching `grads`; the bias always takes part.
  void apply(PricingModel& model, std::span<const FeatureIndex> indices,
             std::span<const double> grads, double bias_grad);

 private:
  void update_slot(std::size_t slot, double grad, double& param, double correction1,
                   double correction2);

  AdamConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<double> first_;
  std::vector<double> second_;
  std::vector<std::uint64_t> last_touch_;
};

/// Mean loss of a batch and its gradient in the model parameters.
struct BatchGradient {
  double mean_loss = 0.0;
  std::vector<FeatureIndex> indices;  // features present in the batch, increasing
  std::vector<double> weight_grads;   // aligned with indices
  double bias_grad = 0.0;
};

/// Chain rule through p(z): d loss / d w_k = mean of (d loss / dp) * z_k.
/// `rows` selects records; an empty span selects all of them.
BatchGradient batch_gradient(const PricingModel& model, std::span<const AuctionRecord> records,
                             std::span<const std::size_t> rows, const LossSpec& loss,
                             Execution execution = Execution::Serial);

/// Applies one optimizer step on the selected records and returns the
/// batch's mean loss before the update. Throws NonFiniteGradient.
double minibatch_step(PricingModel& model, OptimizerState& state,
                      std::span<const AuctionRecord> records, std::span<const std::size_t> rows,
                      const LossSpec& loss, Execution execution = Execution::Serial);

struct TrainConfig {
  LossSpec loss = LossSpec::clearing(1.0);
  std::size_t minibatch_size = 512;
  std::size_t iterations = 10000;
  std::uint64_t seed = 0;
  AdamConfig optimizer;
  std::size_t curve_every = 100;
  Execution execution = Execution::Serial;

  void validate() const;
};

struct CurvePoint {
  std::size_t iteration = 0;
  double mean_loss = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct TrainResult {
  PricingModel model;
  std::vector<CurvePoint> curve;
};

/// Minibatch training over seeded per-epoch shuffles. Weights start at 0 and
/// the bias at the mean second-price floor max{b2, c} of the first minibatch.
/// Each curve point is the mean batch loss over the preceding curve_every steps.
TrainResult train(const Dataset& data, const TrainConfig& config);

void write_checkpoint(std::ostream& out, const PricingModel& model);
PricingModel read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const PricingModel& model);
PricingModel load_checkpoint(const std::filesystem::path& path);

void write_loss_curve(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace clearing
