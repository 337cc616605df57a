#pragma once

// Data-parallel inner loops. Every kernel has a serial reference (`*_serial`)
// and an OpenMP version (`*_parallel`). Per-element outputs are bit-identical
// between the two; reductions go through fixed-size blocks so the parallel
// result does not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "clearing/features.hpp"
#include "clearing/losses.hpp"
#include "clearing/market.hpp"
#include "clearing/model.hpp"
#include "clearing/summation.hpp"

namespace clearing::kernels {

inline constexpr std::size_t kReductionBlock = 4096;

void predict_serial(const PricingModel& model, std::span<const AuctionRecord> records,
                    std::span<double> prices);
void predict_parallel(const PricingModel& model, std::span<const AuctionRecord> records,
                      std::span<double> prices);

/// Loss value and d loss / dp at the model price of records[rows[k]].
void loss_terms_serial(const PricingModel& model, std::span<const AuctionRecord> records,
                       std::span<const std::size_t> rows, const LossSpec& loss,
                       std::span<LossValue> out);
void loss_terms_parallel(const PricingModel& model, std::span<const AuctionRecord> records,
                         std::span<const std::size_t> rows, const LossSpec& loss,
                         std::span<LossValue> out);

/// Sums of second-price outcomes at the given reserves.
struct OutcomeTotals {
  std::size_t records = 0;
  std::size_t matched = 0;
  CompensatedSum revenue;
  CompensatedSum social_welfare;
  CompensatedSum buyer_welfare;
  std::size_t below_median = 0;
  std::size_t under_below_median = 0;
  std::size_t above_median = 0;
  std::size_t under_above_median = 0;

  void merge(const OutcomeTotals& other);
};

struct OutcomeOptions {
  /// Unsold auctions earn 0 instead of the seller's cost.
  bool strict_exchange_revenue = false;
  /// Records with b1 < median_top_bid count as "below the median".
  double median_top_bid = 0.0;
};

OutcomeTotals outcome_totals_serial(std::span<const AuctionRecord> records,
                                    std::span<const double> prices, const OutcomeOptions& options);
OutcomeTotals outcome_totals_parallel(std::span<const AuctionRecord> records,
                                      std::span<const double> prices,
                                      const OutcomeOptions& options);

/// Clearing loss of `instance` at each candidate price.
void clearing_loss_grid_serial(const MarketInstance& instance, std::span<const double> candidates,
                               std::span<double> values);
void clearing_loss_grid_parallel(const MarketInstance& instance,
                                 std::span<const double> candidates, std::span<double> values);

/// Mean loss of `spec` over `records` at each candidate price.
void mean_loss_grid_serial(std::span<const AuctionRecord> records, const LossSpec& spec,
                           std::span<const double> candidates, std::span<double> values);
void mean_loss_grid_parallel(std::span<const AuctionRecord> records, const LossSpec& spec,
                             std::span<const double> candidates, std::span<double> values);

// Dispatch helpers.
void predict(const PricingModel& model, std::span<const AuctionRecord> records,
             std::span<double> prices, Execution execution);
void loss_terms(const PricingModel& model, std::span<const AuctionRecord> records,
                std::span<const std::size_t> rows, const LossSpec& loss, std::span<LossValue> out,
                Execution execution);
OutcomeTotals outcome_totals(std::span<const AuctionRecord> records, std::span<const double> prices,
                             const OutcomeOptions& options, Execution execution);

}  // namespace clearing::kernels
