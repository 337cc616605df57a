#include <omp.h>

#include <cstdint>

#include "clearing/kernels.hpp"

namespace clearing::kernels {

OutcomeTotals reduce_block(std::span<const AuctionRecord> records, std::span<const double> prices,
                           const OutcomeOptions& options);

void predict_parallel(const PricingModel& model, std::span<const AuctionRecord> records,
                      std::span<double> prices) {
  const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) prices[i] = predict_unchecked(model, records[i].features);
}

void loss_terms_parallel(const PricingModel& model, std::span<const AuctionRecord> records,
                         std::span<const std::size_t> rows, const LossSpec& loss,
                         std::span<LossValue> out) {
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto& rec = records[rows[k]];
    out[k] = evaluate_loss(loss, predict_unchecked(model, rec.features), rec);
  }
}

OutcomeTotals outcome_totals_parallel(std::span<const AuctionRecord> records,
                                      std::span<const double> prices,
                                      const OutcomeOptions& options) {
  const std::size_t n = records.size();
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<OutcomeTotals> partial(blocks);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t len = std::min(kReductionBlock, n - begin);
    partial[b] = reduce_block(records.subspan(begin, len), prices.subspan(begin, len), options);
  }
  OutcomeTotals total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

void clearing_loss_grid_parallel(const MarketInstance& instance,
                                 std::span<const double> candidates, std::span<double> values) {
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) values[k] = clearing_loss(candidates[k], instance).value;
}

void mean_loss_grid_parallel(std::span<const AuctionRecord> records, const LossSpec& spec,
                             std::span<const double> candidates, std::span<double> values) {
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    CompensatedSum sum;
    for (const auto& rec : records) sum.add(evaluate_loss(spec, candidates[k], rec).value);
    values[k] = records.empty() ? 0.0 : sum.value() / static_cast<double>(records.size());
  }
}

}  // namespace clearing::kernels
