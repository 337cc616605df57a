#pragma once

#include <limits>
#include <span>
#include <vector>

namespace clearing {

/// A buyer willing to purchase up to `quantity` units at no more than `bid` per unit.
struct BuyerOrder {
  double bid = 0.0;
  double quantity = 0.0;
};

/// A seller supplying up to `quantity` units at no less than `ask` per unit.
struct SellerOrder {
  double ask = 0.0;
  double quantity = 0.0;
};

/// One two-sided market. Prices and quantities are nonnegative reals.
struct MarketInstance {
  std::vector<BuyerOrder> buyers;
  std::vector<SellerOrder> sellers;

  bool empty() const { return buyers.empty() && sellers.empty(); }

  /// Throws InvalidArgument on a negative or non-finite price or quantity.
  void validate() const;
};

/// Quantities traded at an optimal allocation, indexed like the instance orders.
struct Allocation {
  std::vector<double> bought;
  std::vector<double> sold;
};

struct AllocationResult {
  Allocation allocation;
  double gains_from_trade = 0.0;
};

inline constexpr double kUnboundedPrice = std::numeric_limits<double>::infinity();

/// Closed set of prices minimizing the clearing loss of an instance.
/// `hi` equals kUnboundedPrice when every large enough price also clears.
struct ClearingInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool unbounded_above() const { return hi == kUnboundedPrice; }
  bool contains(double p) const { return p >= lo && p <= hi; }
};

/// Greedy optimum of the gains-from-trade LP: highest bid meets lowest ask,
/// trading as much as possible while bid >= ask.
AllocationResult solve_allocation(const MarketInstance& instance);

/// Sorted distinct bid and ask values (the kinks of the clearing loss).
std::vector<double> breakpoints(const MarketInstance& instance);

/// All minimizers of the clearing loss. Throws EmptyMarket.
ClearingInterval clearing_interval(const MarketInstance& instance);

/// Smallest clearing loss over all breakpoints (0 for an empty market).
double min_clearing_loss(const MarketInstance& instance);

/// True iff the dual minimum equals the primal gains from trade within `tolerance`.
bool check_duality(const MarketInstance& instance, double tolerance);

}  // namespace clearing
