#include <algorithm>
#include <cassert>

#include "clearing/kernels.hpp"

namespace clearing::kernels {

namespace {

void add_outcome(OutcomeTotals& t, const AuctionRecord& rec, double price,
                 const OutcomeOptions& options) {
  const double top = rec.top_bid();
  const double reserve = std::max(price, rec.cost);
  ++t.records;
  if (top >= reserve) {
    const double payment = std::max(rec.clearing_floor(), price);
    ++t.matched;
    t.revenue.add(payment);
    t.social_welfare.add(top);
    t.buyer_welfare.add(top - payment);
  } else if (!options.strict_exchange_revenue) {
    t.revenue.add(rec.cost);
  }
  const bool under = price < top;
  if (top < options.median_top_bid) {
    ++t.below_median;
    t.under_below_median += under;
  } else {
    ++t.above_median;
    t.under_above_median += under;
  }
}

}  // namespace

void OutcomeTotals::merge(const OutcomeTotals& o) {
  records += o.records;
  matched += o.matched;
  revenue.merge(o.revenue);
  social_welfare.merge(o.social_welfare);
  buyer_welfare.merge(o.buyer_welfare);
  below_median += o.below_median;
  under_below_median += o.under_below_median;
  above_median += o.above_median;
  under_above_median += o.under_above_median;
}

// Shared by both outcome kernels so that a block is reduced identically.
OutcomeTotals reduce_block(std::span<const AuctionRecord> records, std::span<const double> prices,
                           const OutcomeOptions& options) {
  OutcomeTotals t;
  for (std::size_t i = 0; i < records.size(); ++i) add_outcome(t, records[i], prices[i], options);
  return t;
}

void predict_serial(const PricingModel& model, std::span<const AuctionRecord> records,
                    std::span<double> prices) {
  assert(prices.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    prices[i] = predict_unchecked(model, records[i].features);
}

void loss_terms_serial(const PricingModel& model, std::span<const AuctionRecord> records,
                       std::span<const std::size_t> rows, const LossSpec& loss,
                       std::span<LossValue> out) {
  assert(out.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& rec = records[rows[k]];
    out[k] = evaluate_loss(loss, predict_unchecked(model, rec.features), rec);
  }
}

OutcomeTotals outcome_totals_serial(std::span<const AuctionRecord> records,
                                    std::span<const double> prices,
                                    const OutcomeOptions& options) {
  return reduce_block(records, prices, options);
}

void clearing_loss_grid_serial(const MarketInstance& instance, std::span<const double> candidates,
                               std::span<double> values) {
  for (std::size_t k = 0; k < candidates.size(); ++k)
    values[k] = clearing_loss(candidates[k], instance).value;
}

void mean_loss_grid_serial(std::span<const AuctionRecord> records, const LossSpec& spec,
                           std::span<const double> candidates, std::span<double> values) {
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    CompensatedSum sum;
    for (const auto& rec : records) sum.add(evaluate_loss(spec, candidates[k], rec).value);
    values[k] = records.empty() ? 0.0 : sum.value() / static_cast<double>(records.size());
  }
}

void predict(const PricingModel& model, std::span<const AuctionRecord> records,
             std::span<double> prices, Execution execution) {
  if (execution == Execution::Parallel) {
    predict_parallel(model, records, prices);
  } else {
    predict_serial(model, records, prices);
  }
}

void loss_terms(const PricingModel& model, std::span<const AuctionRecord> records,
                std::span<const std::size_t> rows, const LossSpec& loss, std::span<LossValue> out,
                Execution execution) {
  if (execution == Execution::Parallel) {
    loss_terms_parallel(model, records, rows, loss, out);
  } else {
    loss_terms_serial(model, records, rows, loss, out);
  }
}

OutcomeTotals outcome_totals(std::span<const AuctionRecord> records, std::span<const double> prices,
                             const OutcomeOptions& options, Execution execution) {
  return execution == Execution::Parallel ? outcome_totals_parallel(records, prices, options)
                                          : outcome_totals_serial(records, prices, options);
}

}  // namespace clearing::kernels
