#include <benchmark/benchmark.h>
#include <omp.h>

#include "clearing/datagen.hpp"
#include "clearing/kernels.hpp"
#include "clearing/model.hpp"
#include "clearing/theory.hpp"

namespace {

using namespace clearing;

const Dataset& bench_data() {
  static const Dataset data = [] {
    GenConfig cfg;
    cfg.num_records = 200000;
    cfg.seed = 11;
    for (FeatureIndex k = 0; k < 16; ++k) {
      ContextSpec ctx;
      ctx.id = "c" + std::to_string(k);
      ctx.feature = k;
      ctx.bids.family = Distribution(LogNormal{0.1 * k - 0.8, 1.0});
      cfg.contexts.push_back(ctx);
    }
    return generate(cfg).data;
  }();
  return data;
}

PricingModel bench_model() {
  PricingModel m = PricingModel::zeros(bench_data().dimension);
  for (std::size_t k = 0; k < m.weights.size(); ++k) m.weights[k] = 0.05 * static_cast<double>(k);
  m.bias = 0.7;
  return m;
}

template <bool Parallel>
void BM_Predict(benchmark::State& state) {
  const auto& data = bench_data();
  const auto model = bench_model();
  std::vector<double> prices(data.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::predict_parallel(model, data.records, prices);
    } else {
      kernels::predict_serial(model, data.records, prices);
    }
    benchmark::DoNotOptimize(prices.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}

template <bool Parallel>
void BM_OutcomeTotals(benchmark::State& state) {
  const auto& data = bench_data();
  std::vector<double> prices(data.size());
  kernels::predict_serial(bench_model(), data.records, prices);
  kernels::OutcomeOptions opts;
  opts.median_top_bid = 1.0;
  for (auto _ : state) {
    auto t = Parallel ? kernels::outcome_totals_parallel(data.records, prices, opts)
                      : kernels::outcome_totals_serial(data.records, prices, opts);
    benchmark::DoNotOptimize(t.matched);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}

template <bool Parallel>
void BM_LossTerms(benchmark::State& state) {
  const auto& data = bench_data();
  const auto model = bench_model();
  const auto batch = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> rows(batch);
  for (std::size_t k = 0; k < batch; ++k) rows[k] = (k * 7919) % data.size();
  std::vector<LossValue> out(batch);
  const auto loss = LossSpec::clearing(1.0);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::loss_terms_parallel(model, data.records, rows, loss, out);
    } else {
      kernels::loss_terms_serial(model, data.records, rows, loss, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

template <bool Parallel>
void BM_MeanLossGrid(benchmark::State& state) {
  const auto& data = bench_data();
  std::span<const AuctionRecord> sample(data.records.data(), 20000);
  const auto grid = PriceGrid{0.0, 5.0, 201}.points();
  std::vector<double> values(grid.size());
  const auto loss = LossSpec::clearing(1.0);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::mean_loss_grid_parallel(sample, loss, grid, values);
    } else {
      kernels::mean_loss_grid_serial(sample, loss, grid, values);
    }
    benchmark::DoNotOptimize(values.data());
  }
}

}  // namespace

BENCHMARK(BM_Predict<false>)->Name("predict/serial");
BENCHMARK(BM_Predict<true>)->Name("predict/parallel");
BENCHMARK(BM_OutcomeTotals<false>)->Name("outcome_totals/serial");
BENCHMARK(BM_OutcomeTotals<true>)->Name("outcome_totals/parallel");
BENCHMARK(BM_LossTerms<false>)->Name("loss_terms/serial")->Arg(512)->Arg(65536);
BENCHMARK(BM_LossTerms<true>)->Name("loss_terms/parallel")->Arg(512)->Arg(65536);
BENCHMARK(BM_MeanLossGrid<false>)->Name("mean_loss_grid/serial");
BENCHMARK(BM_MeanLossGrid<true>)->Name("mean_loss_grid/parallel");

BENCHMARK_MAIN();
