#include "clearing/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clearing/error.hpp"
#include "clearing/losses.hpp"

namespace clearing {

namespace {

bool valid_amount(double x) { return std::isfinite(x) && x >= 0.0; }

template <typename Orders, typename Key>
std::vector<std::size_t> sorted_order(const Orders& orders, Key key) {
  std::vector<std::size_t> idx(orders.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key(orders[a], orders[b]); });
  return idx;
}

}  // namespace

void MarketInstance::validate() const {
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    if (!valid_amount(buyers[i].bid) || !valid_amount(buyers[i].quantity))
      throw InvalidArgument("buyer " + std::to_string(i) + " has a negative or non-finite field");
  }
  for (std::size_t j = 0; j < sellers.size(); ++j) {
    if (!valid_amount(sellers[j].ask) || !valid_amount(sellers[j].quantity))
      throw InvalidArgument("seller " + std::to_string(j) + " has a negative or non-finite field");
  }
}

AllocationResult solve_allocation(const MarketInstance& instance) {
  AllocationResult out;
  out.allocation.bought.assign(instance.buyers.size(), 0.0);
  out.allocation.sold.assign(instance.sellers.size(), 0.0);

  const auto buy_order = sorted_order(
      instance.buyers, [](const BuyerOrder& a, const BuyerOrder& b) { return a.bid > b.bid; });
  const auto sell_order = sorted_order(
      instance.sellers, [](const SellerOrder& a, const SellerOrder& b) { return a.ask < b.ask; });

  std::size_t bi = 0;
  std::size_t si = 0;
  double buyer_left = buy_order.empty() ? 0.0 : instance.buyers[buy_order[0]].quantity;
  double seller_left = sell_order.empty() ? 0.0 : instance.sellers[sell_order[0]].quantity;
  double value = 0.0;
  double cost = 0.0;
  while (bi < buy_order.size() && si < sell_order.size()) {
    const auto& buyer = instance.buyers[buy_order[bi]];
    const auto& seller = instance.sellers[sell_order[si]];
    if (buyer.bid < seller.ask) break;
    const double traded = std::min(buyer_left, seller_left);
    out.allocation.bought[buy_order[bi]] += traded;
    out.allocation.sold[sell_order[si]] += traded;
    value += buyer.bid * traded;
    cost += seller.ask * traded;
    buyer_left -= traded;
    seller_left -= traded;
    if (buyer_left <= 0.0) {
      out.allocation.bought[buy_order[bi]] = buyer.quantity;
      if (++bi < buy_order.size()) buyer_left = instance.buyers[buy_order[bi]].quantity;
    }
    if (seller_left <= 0.0) {
      out.allocation.sold[sell_order[si]] = seller.quantity;
      if (++si < sell_order.size()) seller_left = instance.sellers[sell_order[si]].quantity;
    }
  }
  out.gains_from_trade = value - cost;
  return out;
}

std::vector<double> breakpoints(const MarketInstance& instance) {
  std::vector<double> pts;
  pts.reserve(instance.buyers.size() + instance.sellers.size());
  for (const auto& b : instance.buyers) pts.push_back(b.bid);
  for (const auto& s : instance.sellers) pts.push_back(s.ask);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

ClearingInterval clearing_interval(const MarketInstance& instance) {
  if (instance.empty()) throw EmptyMarket();

  const auto pts = breakpoints(instance);
  const std::size_t k = pts.size();

  // Quantity sitting exactly at each breakpoint, split by side.
  std::vector<double> demand_at(k, 0.0);
  std::vector<double> supply_at(k, 0.0);
  auto slot = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), x) - pts.begin());
  };
  double total_demand = 0.0;
  double total_supply = 0.0;
  for (const auto& b : instance.buyers) {
    demand_at[slot(b.bid)] += b.quantity;
    total_demand += b.quantity;
  }
  for (const auto& s : instance.sellers) {
    supply_at[slot(s.ask)] += s.quantity;
    total_supply += s.quantity;
  }
  // Slopes are compared against zero up to the accumulated rounding of the sums.
  const double eps = 1e-12 * (total_demand + total_supply);

  // Left and right slopes at pts[t]:
  //   left  = -(demand with bid >= p) + (supply with ask < p)
  //   right = -(demand with bid >  p) + (supply with ask <= p)
  std::vector<double> left(k), right(k);
  double demand_at_or_above = total_demand;
  double supply_below = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    left[t] = -demand_at_or_above + supply_below;
    demand_at_or_above -= demand_at[t];
    supply_below += supply_at[t];
    right[t] = -demand_at_or_above + supply_below;
  }

  ClearingInterval out;
  if (total_demand <= eps) {
    out.lo = 0.0;
  } else {
    out.lo = pts.back();
    for (std::size_t t = 0; t < k; ++t) {
      if (right[t] >= -eps) {
        out.lo = pts[t];
        break;
      }
    }
  }
  if (total_supply <= eps) {
    out.hi = kUnboundedPrice;
  } else {
    out.hi = pts.front();
    for (std::size_t t = k; t-- > 0;) {
      if (left[t] <= eps) {
        out.hi = pts[t];
        break;
      }
    }
  }
  out.lo = std::max(out.lo, 0.0);
  return out;
}

double min_clearing_loss(const MarketInstance& instance) {
  const auto pts = breakpoints(instance);
  if (pts.empty()) return 0.0;
  double best = clearing_loss(pts.front(), instance).value;
  for (double p : pts) best = std::min(best, clearing_loss(p, instance).value);
  return best;
}

bool check_duality(const MarketInstance& instance, double tolerance) {
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const double primal = solve_allocation(instance).gains_from_trade;
  const double dual = min_clearing_loss(instance);
  return std::abs(primal - dual) <= tolerance;
}

}  // namespace clearing
