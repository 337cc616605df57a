#include "clearing/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "clearing/distribution.hpp"
#include "clearing/error.hpp"
#include "clearing/kernels.hpp"
#include "clearing/text.hpp"

namespace clearing {


double predict(const PricingModel& model, const FeatureVector& z) {
  if (z.dimension() != model.dimension()) throw DimensionMismatch(model.dimension(), z.dimension());
  return predict_unchecked(model, z);
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidArgument("beta1 and beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
}

OptimizerState::OptimizerState(std::size_t dimension, AdamConfig config)
    : config_(config),
      first_(dimension + 1, 0.0),
      second_(dimension + 1, 0.0),
      last_touch_(dimension + 1, 0) {
  config_.validate();
}

std::vector<double> OptimizerState::first_moment() const {
  std::vector<double> out(first_.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = first_[j] * std::pow(config_.beta1, static_cast<double>(step_count_ - last_touch_[j]));
  return out;
}

std::vector<double> OptimizerState::second_moment() const {
  std::vector<double> out(second_.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] =
        second_[j] * std::pow(config_.beta2, static_cast<double>(step_count_ - last_touch_[j]));
  return out;
}

void OptimizerState::update_slot(std::size_t slot, double grad, double& param, double correction1,
                                 double correction2) {
  const double skipped = static_cast<double>(step_count_ - last_touch_[slot]);
  const double decay1 = skipped == 1.0 ? config_.beta1 : std::pow(config_.beta1, skipped);
  const double decay2 = skipped == 1.0 ? config_.beta2 : std::pow(config_.beta2, skipped);
  first_[slot] = decay1 * first_[slot] + (1.0 - config_.beta1) * grad;
  second_[slot] = decay2 * second_[slot] + (1.0 - config_.beta2) * grad * grad;
  last_touch_[slot] = step_count_;
  const double m_hat = first_[slot] / correction1;
  const double v_hat = second_[slot] / correction2;
  param -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
}

void OptimizerState::apply(PricingModel& model, std::span<const FeatureIndex> indices,
                           std::span<const double> grads, double bias_grad) {
  if (model.dimension() != dimension()) throw DimensionMismatch(dimension(), model.dimension());
  if (indices.size() != grads.size())
    throw InvalidArgument("gradient indices and values differ in length");
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < indices.size(); ++k)
    update_slot(indices[k], grads[k], model.weights[indices[k]], correction1, correction2);
  update_slot(dimension(), bias_grad, model.bias, correction1, correction2);
}

BatchGradient batch_gradient(const PricingModel& model, std::span<const AuctionRecord> records,
                             std::span<const std::size_t> rows, const LossSpec& loss,
                             Execution execution) {
  if (!loss.trainable()) throw WrongLossKind("the revenue loss is evaluation-only");
  std::vector<std::size_t> all_rows;
  if (rows.empty()) {
    all_rows.resize(records.size());
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    rows = all_rows;
  }
  if (rows.empty()) throw InvalidArgument("minibatch is empty");
  for (std::size_t r : rows) {
    if (r >= records.size()) throw InvalidArgument("minibatch row out of range");
    if (records[r].features.dimension() != model.dimension())
      throw DimensionMismatch(model.dimension(), records[r].features.dimension());
  }

  std::vector<LossValue> terms(rows.size());
  kernels::loss_terms(model, records, rows, loss, terms, execution);

  // Scatter (index, dl/dp * z) pairs and reduce per index in record order.
  struct Contribution {
    FeatureIndex index;
    double value;
  };
  std::vector<Contribution> contribs;
  const double scale = 1.0 / static_cast<double>(rows.size());
  BatchGradient out;
  double loss_sum = 0.0;
  double bias_sum = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    loss_sum += terms[k].value;
    bias_sum += terms[k].subgradient;
    for (const auto& e : records[rows[k]].features.entries())
      contribs.push_back({e.index, terms[k].subgradient * e.value});
  }
  std::stable_sort(contribs.begin(), contribs.end(),
                   [](const Contribution& a, const Contribution& b) { return a.index < b.index; });
  for (std::size_t k = 0; k < contribs.size();) {
    const FeatureIndex idx = contribs[k].index;
    double g = 0.0;
    for (; k < contribs.size() && contribs[k].index == idx; ++k) g += contribs[k].value;
    out.indices.push_back(idx);
    out.weight_grads.push_back(g * scale);
  }
  out.mean_loss = loss_sum * scale;
  out.bias_grad = bias_sum * scale;
  return out;
}

double minibatch_step(PricingModel& model, OptimizerState& state,
                      std::span<const AuctionRecord> records, std::span<const std::size_t> rows,
                      const LossSpec& loss, Execution execution) {
  const auto grad = batch_gradient(model, records, rows, loss, execution);
  bool finite = std::isfinite(grad.bias_grad);
  for (double g : grad.weight_grads) finite = finite && std::isfinite(g);
  if (!finite) throw NonFiniteGradient("non-finite gradient in minibatch step");
  state.apply(model, grad.indices, grad.weight_grads, grad.bias_grad);
  return grad.mean_loss;
}

void TrainConfig::validate() const {
  loss.validate();
  if (!loss.trainable()) throw InvalidArgument("the revenue loss is evaluation-only");
  if (minibatch_size == 0) throw InvalidArgument("minibatch size must be positive");
  if (iterations == 0) throw InvalidArgument("iterations must be positive");
  if (curve_every == 0) throw InvalidArgument("curve interval must be positive");
  optimizer.validate();
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw InvalidArgument("training dataset is empty");

  const std::size_t n = data.size();
  const std::size_t batch = std::min(config.minibatch_size, n);
  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  std::vector<std::size_t> rows(batch);
  auto next_batch = [&] {
    for (auto& r : rows) {
      if (cursor == n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      r = order[cursor++];
    }
  };

  TrainResult result{PricingModel::zeros(data.dimension), {}};
  OptimizerState state(data.dimension, config.optimizer);
  std::span<const AuctionRecord> records(data.records);

  double window = 0.0;
  std::size_t in_window = 0;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    next_batch();
    if (it == 1) {
      double floor_sum = 0.0;
      for (std::size_t r : rows) floor_sum += records[r].clearing_floor();
      result.model.bias = floor_sum / static_cast<double>(rows.size());
    }
    window += minibatch_step(result.model, state, records, rows, config.loss, config.execution);
    ++in_window;
    if (it % config.curve_every == 0 || it == config.iterations) {
      result.curve.push_back({it, window / static_cast<double>(in_window)});
      window = 0.0;
      in_window = 0;
    }
  }
  return result;
}

void write_checkpoint(std::ostream& out, const PricingModel& model) {
  out << model.dimension() << ' ' << format_double(model.bias) << '\n';
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    if (model.weights[j] != 0.0) out << j << ' ' << format_double(model.weights[j]) << '\n';
  }
}

PricingModel read_checkpoint(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_fields = [&](std::string& a, std::string& b) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string extra;
      if (!(ls >> a >> b) || (ls >> extra)) throw ParseError(line_no, "expected two fields");
      return true;
    }
    return false;
  };
  std::string a, b;
  if (!next_fields(a, b)) throw ParseError(1, "missing checkpoint header");
  std::size_t dimension = 0;
  double bias = 0.0;
  {
    const auto res = std::from_chars(a.data(), a.data() + a.size(), dimension);
    if (res.ec != std::errc() || res.ptr != a.data() + a.size() || dimension == 0)
      throw ParseError(line_no, "bad dimension '" + a + "'");
    if (!parse_double(b, bias) || !std::isfinite(bias))
      throw ParseError(line_no, "bad bias '" + b + "'");
  }
  PricingModel model = PricingModel::zeros(dimension);
  model.bias = bias;
  while (next_fields(a, b)) {
    std::size_t index = 0;
    double w = 0.0;
    const auto res = std::from_chars(a.data(), a.data() + a.size(), index);
    if (res.ec != std::errc() || res.ptr != a.data() + a.size())
      throw ParseError(line_no, "bad index '" + a + "'");
    if (index >= dimension) throw ParseError(line_no, "index " + a + " exceeds dimension");
    if (!parse_double(b, w) || !std::isfinite(w)) throw ParseError(line_no, "bad weight '" + b + "'");
    model.weights[index] = w;
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const PricingModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  write_checkpoint(out, model);
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

PricingModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

void write_loss_curve(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "iteration,mean_loss\n";
  for (const auto& pt : curve) out << pt.iteration << ',' << format_double(pt.mean_loss) << '\n';
}

}  // namespace clearing
