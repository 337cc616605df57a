#pragma once

#include <cstddef>
#include <span>

#include "clearing/distribution.hpp"
#include "clearing/execution.hpp"
#include "clearing/features.hpp"
#include "clearing/losses.hpp"
#include "clearing/market.hpp"

namespace clearing {

/// `quantity` units demanded (or supplied) at a price drawn from `dist`.
struct DistributionTerm {
  double quantity = 1.0;
  Distribution dist;
};

struct PriceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Interval of prices where expected demand sum_i mu_i (1 - F_i(p)) meets
/// expected supply sum_j lambda_j G_j(p), i.e. where the expected clearing
/// loss is minimized. Throws NoRoot when either side has no quantity.
PriceInterval balance_interval(std::span<const DistributionTerm> buyers,
                               std::span<const DistributionTerm> sellers);

/// Midpoint of balance_interval().
double balance_price(std::span<const DistributionTerm> buyers,
                     std::span<const DistributionTerm> sellers);

/// F^{-1}(1 - lambda / n). Throws OutOfRange unless 0 <= lambda <= n.
double quantile_price(const Distribution& bids, int bidders, double lambda);

/// 1 - e^{-lambda}.
double match_rate_lower_bound(double lambda);

/// ln(1 / (1 - mr)), the inverse of match_rate_lower_bound. Throws OutOfRange
/// unless 0 <= mr < 1.
double lambda_for_target_match_rate(double match_rate);

/// 1 - (1 - lambda / n)^n: match rate of n i.i.d. bidders at the quantile price.
double exact_iid_match_rate(int bidders, double lambda);

/// Fraction of no-reserve social welfare guaranteed at the clearing price.
double welfare_lower_bound(double lambda);

struct PriceGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t steps = 1001;

  /// `steps` evenly spaced points including both ends. Throws on steps < 2.
  std::vector<double> points() const;
};

struct LossMinimum {
  double price = 0.0;
  double value = 0.0;
};

/// Grid scan of the clearing loss plus every breakpoint inside the grid; the
/// smallest minimizing candidate is returned.
LossMinimum brute_force_min_loss(const MarketInstance& instance, const PriceGrid& grid,
                                 Execution execution = Execution::Serial);

/// Same for one auction record under any loss (revenue included).
LossMinimum brute_force_min_loss(const AuctionRecord& record, const LossSpec& loss,
                                 const PriceGrid& grid);

/// Mean loss over a sample of records, scanned on the grid only.
LossMinimum brute_force_min_loss(std::span<const AuctionRecord> records, const LossSpec& loss,
                                 const PriceGrid& grid, Execution execution = Execution::Serial);

}  // namespace clearing
