#include "clearing/model.hpp"

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <sstream>

#include "clearing/datagen.hpp"
#include "clearing/error.hpp"
#include "test_support.hpp"

namespace clearing {
namespace {

using testing::make_record;

TEST(Predict, Examples) {
  PricingModel m{{0.5, -1.0, 2.0}, 0.25};
  const FeatureVector z(3, {{0, 2.0}, {2, 1.0}});
  EXPECT_DOUBLE_EQ(predict(m, z), 0.25 + 1.0 + 2.0);
  EXPECT_DOUBLE_EQ(predict(PricingModel::zeros(3), z), 0.0);
  EXPECT_DOUBLE_EQ(predict(PricingModel::constant(3, 0.8), z), 0.8);
  EXPECT_THROW(predict(m, FeatureVector::one_hot(4, 1)), DimensionMismatch);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  PricingModel m = PricingModel::zeros(2);
  OptimizerState s(2, AdamConfig{});
  const std::vector<FeatureIndex> idx{1};
  const std::vector<double> g{-3.0};
  s.apply(m, idx, g, 0.5);
  EXPECT_NEAR(m.weights[1], 1e-3, 1e-9);
  EXPECT_NEAR(m.bias, -1e-3, 1e-9);
  EXPECT_EQ(m.weights[0], 0.0);
}

TEST(Adam, ZeroGradientLeavesModel) {
  PricingModel m{{1.0, 2.0}, 3.0};
  const PricingModel before = m;
  OptimizerState s(2, AdamConfig{});
  const std::vector<FeatureIndex> idx{0, 1};
  const std::vector<double> g{0.0, 0.0};
  s.apply(m, idx, g, 0.0);
  EXPECT_EQ(m, before);
}

TEST(Adam, ConfigValidation) {
  EXPECT_THROW((AdamConfig{0.0}.validate()), InvalidArgument);
  EXPECT_THROW((AdamConfig{1e-3, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((AdamConfig{1e-3, 0.9, 0.999, 0.0}.validate()), InvalidArgument);
}

// Dense Adam over all slots; only slots present in a step change their parameter.
struct DenseAdam {
  AdamConfig cfg;
  std::vector<double> m, v;
  int t = 0;
  explicit DenseAdam(std::size_t slots) : m(slots), v(slots) {}
  void step(std::vector<double>& params, const std::vector<double>& g,
            const std::vector<bool>& present) {
    ++t;
    const double c1 = 1 - std::pow(cfg.beta1, t), c2 = 1 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1 - cfg.beta2) * g[k] * g[k];
      if (present[k]) params[k] -= cfg.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.epsilon);
    }
  }
};

TEST(Adam, LazyMomentsMatchDenseReference) {
  const std::size_t dim = 12;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution touch(0.3);
  PricingModel model = PricingModel::zeros(dim);
  OptimizerState lazy(dim, AdamConfig{});
  DenseAdam dense(dim + 1);
  std::vector<double> params(dim + 1, 0.0);
  for (int step = 0; step < 300; ++step) {
    std::vector<FeatureIndex> idx;
    std::vector<double> gs, full(dim + 1, 0.0);
    std::vector<bool> present(dim + 1, false);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!touch(rng)) continue;
      idx.push_back(static_cast<FeatureIndex>(k));
      gs.push_back(normal(rng));
      full[k] = gs.back();
      present[k] = true;
    }
    full[dim] = normal(rng);
    present[dim] = true;
    lazy.apply(model, idx, gs, full[dim]);
    dense.step(params, full, present);
  }
  const auto m1 = lazy.first_moment();
  const auto m2 = lazy.second_moment();
  for (std::size_t k = 0; k <= dim; ++k) {
    EXPECT_NEAR(m1[k], dense.m[k], 1e-12);
    EXPECT_NEAR(m2[k], dense.v[k], 1e-12);
    const double w = k < dim ? model.weights[k] : model.bias;
    EXPECT_NEAR(w, params[k], 1e-9);
  }
}

TEST(Adam, UntouchedWeightsNeverMove) {
  PricingModel model{{0.7, -0.2, 0.0}, 0.0};
  OptimizerState s(3, AdamConfig{});
  const std::vector<FeatureIndex> idx{2};
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> g{1.0 + i};
    s.apply(model, idx, g, 0.1);
  }
  EXPECT_EQ(model.weights[0], 0.7);
  EXPECT_EQ(model.weights[1], -0.2);
}

std::vector<AuctionRecord> dense_records(std::size_t count, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AuctionRecord> out;
  for (std::size_t r = 0; r < count; ++r) {
    std::vector<FeatureEntry> entries;
    for (std::size_t k = 0; k < dim; ++k)
      if (u(rng) < 0.5) entries.push_back({static_cast<FeatureIndex>(k), u(rng) * 2 - 1});
    std::vector<double> bids{u(rng) * 3, u(rng) * 3, u(rng) * 3};
    std::sort(bids.begin(), bids.end(), std::greater<>());
    out.push_back({FeatureVector(dim, entries), bids, u(rng) * 0.2});
  }
  return out;
}

TEST(BatchGradient, ChainRuleMatchesFiniteDifferences) {
  const std::size_t dim = 6;
  const auto records = dense_records(64, dim, 9);
  PricingModel model{{0.3, -0.1, 0.2, 0.05, -0.4, 0.1}, 0.9};
  for (const auto& spec : {LossSpec::squared_top_bid(0.3), LossSpec::squared_second_bid()}) {
    const auto g = batch_gradient(model, records, {}, spec);
    const double h = 1e-6;
    for (std::size_t j = 0; j < g.indices.size(); ++j) {
      auto plus = model, minus = model;
      plus.weights[g.indices[j]] += h;
      minus.weights[g.indices[j]] -= h;
      const double fd = (batch_gradient(plus, records, {}, spec).mean_loss -
                         batch_gradient(minus, records, {}, spec).mean_loss) /
                        (2 * h);
      EXPECT_NEAR(g.weight_grads[j], fd, 1e-5);
    }
    auto plus = model, minus = model;
    plus.bias += h;
    minus.bias -= h;
    const double fd = (batch_gradient(plus, records, {}, spec).mean_loss -
                       batch_gradient(minus, records, {}, spec).mean_loss) /
                      (2 * h);
    EXPECT_NEAR(g.bias_grad, fd, 1e-5);
  }
}

TEST(BatchGradient, SerialAndParallelAgree) {
  omp_set_num_threads(4);
  const auto records = dense_records(3000, 8, 10);
  PricingModel model{{0.3, -0.1, 0.2, 0.05, -0.4, 0.1, 0.0, 0.2}, 0.9};
  const auto spec = LossSpec::clearing(0.7);
  const auto a = batch_gradient(model, records, {}, spec, Execution::Serial);
  const auto b = batch_gradient(model, records, {}, spec, Execution::Parallel);
  EXPECT_EQ(a.mean_loss, b.mean_loss);
  EXPECT_EQ(a.bias_grad, b.bias_grad);
  EXPECT_EQ(a.weight_grads, b.weight_grads);
}

TEST(BatchGradient, Rejections) {
  const std::vector<AuctionRecord> records{make_record({2, 1}, 0, 2)};
  EXPECT_THROW(batch_gradient(PricingModel::zeros(3), records, {}, LossSpec::clearing(1)),
               DimensionMismatch);
  EXPECT_THROW(batch_gradient(PricingModel::zeros(2), records, {}, LossSpec::revenue()),
               WrongLossKind);
  const std::vector<std::size_t> bad_rows{5};
  EXPECT_THROW(batch_gradient(PricingModel::zeros(2), records, bad_rows, LossSpec::clearing(1)),
               InvalidArgument);
}

TEST(MinibatchStep, NonFiniteGradientThrows) {
  const std::vector<AuctionRecord> records{make_record({2, 1}, 0)};
  PricingModel model{{std::numeric_limits<double>::infinity()}, 0.0};
  OptimizerState s(1, AdamConfig{});
  EXPECT_THROW(minibatch_step(model, s, records, {}, LossSpec::squared_top_bid()),
               NonFiniteGradient);
}

Dataset constant_dataset(std::size_t n, std::vector<double> bids, double cost) {
  Dataset d{1, {}};
  for (std::size_t i = 0; i < n; ++i) d.records.push_back(make_record(bids, cost));
  return d;
}

TEST(Train, InitialBiasIsMeanFloorOfFirstBatch) {
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.optimizer.learning_rate = 1e-12;
  const auto res = train(constant_dataset(10, {3, 2}, 2.5), cfg);
  EXPECT_NEAR(res.model.bias, 2.5, 1e-9);
}

TEST(Train, ConvergesToTopBidOnConstantData) {
  TrainConfig cfg;
  cfg.loss = LossSpec::clearing(0.5);
  cfg.iterations = 3000;
  cfg.minibatch_size = 8;
  cfg.optimizer.learning_rate = 0.01;
  const auto res = train(constant_dataset(32, {2}, 0), cfg);
  EXPECT_NEAR(res.model.bias + res.model.weights[0], 2.0, 0.03);
}

TEST(Train, SquaredTopBidFixedPoint) {
  TrainConfig cfg;
  cfg.loss = LossSpec::squared_top_bid();
  cfg.iterations = 6000;
  cfg.minibatch_size = 8;
  const auto res = train(constant_dataset(32, {1.7, 0.4}, 0), cfg);
  EXPECT_NEAR(res.model.bias + res.model.weights[0], 1.7, 1e-3);
}

TEST(MinibatchStep, ClearingLossFallsOnFixedBatchBelowBids) {
  std::vector<AuctionRecord> records;
  for (int i = 0; i < 16; ++i) records.push_back(make_record({5.0 + i, 4.0 + i, 3.0 + i}, 0));
  PricingModel model = PricingModel::zeros(1);
  OptimizerState s(1, AdamConfig{});
  EXPECT_EQ(batch_gradient(model, records, {}, LossSpec::clearing(1)).bias_grad, -3.0);
  std::vector<double> losses;
  for (int i = 0; i < 100; ++i)
    losses.push_back(minibatch_step(model, s, records, {}, LossSpec::clearing(1)));
  for (std::size_t i = 10; i < losses.size(); i += 10) EXPECT_LT(losses[i], losses[i - 10]);
}

TEST(Train, ConvexLossCurvesFlatInFinalHalf) {
  // 100 batches of 512: each curve window averages over exactly one epoch.
  const auto gen = generate(testing::iid_config(51200, Distribution::parse("uniform:0,1"), 5, 4));
  for (const auto& loss : {LossSpec::clearing(1), LossSpec::squared_top_bid(),
                           LossSpec::squared_second_bid()}) {
    TrainConfig cfg;
    cfg.loss = loss;
    cfg.iterations = 4000;
    cfg.curve_every = 100;
    const auto curve = train(gen.data, cfg).curve;
    const double scale = std::abs(curve.back().mean_loss);
    for (std::size_t k = curve.size() / 2 + 1; k < curve.size(); ++k)
      EXPECT_LE(curve[k].mean_loss, curve[k - 1].mean_loss + 0.01 * scale)
          << to_string(loss.kind) << " at " << curve[k].iteration;
  }
}

TEST(Train, IidUniformConvergesToQuantilePrice) {
  const auto gen = generate(testing::iid_config(50000, Distribution::parse("uniform:0,1"), 5, 3));
  TrainConfig cfg;
  cfg.loss = LossSpec::clearing(1.0);
  cfg.iterations = 6000;
  cfg.optimizer.learning_rate = 0.003;
  const auto res = train(gen.data, cfg);
  EXPECT_NEAR(res.model.bias + res.model.weights[0], 0.8, 0.02);
}

TEST(Train, DeterministicForSeed) {
  const auto gen = generate(testing::iid_config(5000, Distribution::parse("exp:1"), 3, 1));
  TrainConfig cfg;
  cfg.iterations = 300;
  cfg.minibatch_size = 64;
  cfg.curve_every = 50;
  cfg.seed = 11;
  const auto a = train(gen.data, cfg);
  const auto b = train(gen.data, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.curve, b.curve);
  ASSERT_EQ(a.curve.size(), 6u);
  EXPECT_EQ(a.curve.back().iteration, 300u);
  cfg.execution = Execution::Parallel;
  EXPECT_EQ(train(gen.data, cfg).model, a.model);
  cfg.seed = 12;
  EXPECT_NE(train(gen.data, cfg).model, a.model);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.loss = LossSpec::revenue();
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = TrainConfig{};
  cfg.minibatch_size = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_THROW(train(Dataset{1, {}}, TrainConfig{}), InvalidArgument);
}

TEST(Checkpoint, RoundTripIsExact) {
  PricingModel m{{0.1, 0.0, -1.0 / 3.0, 1e-300}, std::nextafter(0.8, 1.0)};
  std::stringstream ss;
  write_checkpoint(ss, m);
  EXPECT_EQ(read_checkpoint(ss), m);
  const auto path = testing::temp_path("model_roundtrip.txt");
  save_checkpoint(path, m);
  EXPECT_EQ(load_checkpoint(path), m);
}

TEST(Checkpoint, ParseErrorsCarryLine) {
  auto fails_at = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      read_checkpoint(in);
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
      return;
    }
    ADD_FAILURE() << "no ParseError for: " << text;
  };
  fails_at("", 1);
  fails_at("3 x\n", 1);
  fails_at("3 0.5\n1 0.2\n7 0.1\n", 3);
  fails_at("3 0.5\n1 abc\n", 2);
  fails_at("3 0.5\n1 0.2 9\n", 2);
  EXPECT_THROW(load_checkpoint(testing::temp_path("no_such_model.txt")), Error);
}

TEST(LossCurve, CsvFormat) {
  const std::vector<CurvePoint> curve{{100, 0.5}, {200, 0.25}};
  std::ostringstream out;
  write_loss_curve(out, curve);
  EXPECT_EQ(out.str(), "iteration,mean_loss\n100,0.5\n200,0.25\n");
}

}  // namespace
}  // namespace clearing
