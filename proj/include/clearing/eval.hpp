#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clearing/execution.hpp"
#include "clearing/features.hpp"
#include "clearing/losses.hpp"
#include "clearing/model.hpp"

namespace clearing {

struct AuctionOutcome {
  bool sold = false;
  double payment = 0.0;
  double welfare = 0.0;
  double buyer_surplus = 0.0;
};

/// Second-price auction with effective reserve max{p, c}. An unsold item
/// "pays" the seller's cost c. Throws EmptyBids.
AuctionOutcome simulate_auction(const AuctionRecord& record, double price);

struct ContextMatchRate {
  std::string context;  // feature support, e.g. "3" or "1+4"
  std::size_t records = 0;
  double match_rate = 0.0;
};

struct MetricsReport {
  std::size_t record_count = 0;
  double revenue = 0.0;
  double match_rate = 0.0;
  double social_welfare = 0.0;
  double buyer_welfare = 0.0;
  double relative_revenue = 0.0;
  double relative_match_rate = 0.0;
  double relative_social_welfare = 0.0;
  double relative_buyer_welfare = 0.0;
  double median_top_bid = 0.0;
  double underprediction_below_median = 0.0;
  double underprediction_above_median = 0.0;
  std::vector<ContextMatchRate> contexts;
};

struct EvalOptions {
  /// Count unsold auctions as zero revenue instead of the seller's cost.
  bool strict_exchange_revenue = false;
  bool per_context = true;
  Execution execution = Execution::Parallel;
};

/// Metrics at the model's prices; relative metrics divide by the cost-only
/// (p = 0) auction on the same records (NaN when that baseline is 0).
/// Records must match the model dimension.
MetricsReport evaluate(const PricingModel& model, const Dataset& data,
                       const EvalOptions& options = {});

/// Same, for explicit per-record reserve prices.
MetricsReport evaluate_prices(const Dataset& data, std::span<const double> prices,
                              const EvalOptions& options = {});

struct SweepRow {
  LossSpec loss;
  MetricsReport metrics;
  std::vector<CurvePoint> curve;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Trains one model per loss on `train_set` (sharing every other setting of
/// `base`) and evaluates it on `test_set`.
SweepResult sweep(const Dataset& train_set, const Dataset& test_set,
                  std::span<const LossSpec> grid, const TrainConfig& base,
                  const EvalOptions& options = {});

struct CalibrationRow {
  double lambda = 0.0;
  double target_match_rate = 0.0;
  double realized_match_rate = 0.0;
  std::string context;
  double context_match_rate = 0.0;
};

/// Target 1 - e^{-lambda} against realized match rates, one row per
/// (sweep row, context). Throws WrongLossKind on non-clearing rows.
std::vector<CalibrationRow> calibration_curve(const SweepResult& result);

void write_metrics_csv(std::ostream& out, const SweepResult& result);
/// Single report; same metric columns without the loss columns.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);
void write_metrics_table(std::ostream& out, const MetricsReport& report);
void write_metrics_table(std::ostream& out, const SweepResult& result);
void write_calibration_csv(std::ostream& out, std::span<const CalibrationRow> rows);

}  // namespace clearing
