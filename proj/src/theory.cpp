#include "clearing/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clearing/error.hpp"
#include "clearing/kernels.hpp"

namespace clearing {

namespace {

double excess_demand(std::span<const DistributionTerm> buyers,
                     std::span<const DistributionTerm> sellers, double p) {
  double h = 0.0;
  for (const auto& b : buyers) h += b.quantity * (1.0 - b.dist.cdf(p));
  for (const auto& s : sellers) h -= s.quantity * s.dist.cdf(p);
  return h;
}

// Boundary between {pred true} on the left and {pred false} on the right.
template <typename Pred>
double bisect(double lo, double hi, Pred pred) {
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LossMinimum pick_minimum(std::span<const double> candidates, std::span<const double> values) {
  LossMinimum best{candidates[0], values[0]};
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (values[k] < best.value) best = {candidates[k], values[k]};
  }
  return best;
}

std::vector<double> with_breakpoints(std::vector<double> candidates, std::span<const double> extra,
                                     double lo, double hi) {
  for (double x : extra) {
    if (x >= lo && x <= hi) candidates.push_back(x);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  return candidates;
}

}  // namespace

PriceInterval balance_interval(std::span<const DistributionTerm> buyers,
                               std::span<const DistributionTerm> sellers) {
  double demand = 0.0;
  double supply = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& b : buyers) demand += b.quantity;
  for (const auto& s : sellers) supply += s.quantity;
  if (!(demand > 0.0) || !(supply > 0.0))
    throw NoRoot("balance equation needs positive buyer and seller quantity");
  for (const auto* side : {&buyers, &sellers}) {
    for (const auto& t : *side) {
      lo = std::min(lo, t.dist.support_lo());
      hi = std::max(hi, t.dist.support_hi());
    }
  }
  // Below every support the excess demand is +demand; above, -supply.
  lo -= 1.0;
  if (!std::isfinite(hi)) {
    hi = std::max(1.0, lo + 2.0);
    int expansions = 0;
    while (excess_demand(buyers, sellers, hi) >= 0.0) {
      hi *= 2.0;
      if (++expansions > 1000) throw NoRoot("no sign change while expanding the bracket");
    }
  } else {
    hi += 1.0;
  }
  PriceInterval out;
  out.lo = bisect(lo, hi, [&](double p) { return excess_demand(buyers, sellers, p) > 0.0; });
  out.hi = bisect(lo, hi, [&](double p) { return excess_demand(buyers, sellers, p) >= 0.0; });
  return out;
}

double balance_price(std::span<const DistributionTerm> buyers,
                     std::span<const DistributionTerm> sellers) {
  return balance_interval(buyers, sellers).midpoint();
}

double quantile_price(const Distribution& bids, int bidders, double lambda) {
  if (bidders < 1) throw OutOfRange("need at least one bidder");
  if (!(lambda >= 0.0) || lambda > bidders) throw OutOfRange("lambda must lie in [0, n]");
  return bids.quantile(1.0 - lambda / bidders);
}

double match_rate_lower_bound(double lambda) {
  if (!(lambda >= 0.0)) throw OutOfRange("lambda must be >= 0");
  return -std::expm1(-lambda);
}

double lambda_for_target_match_rate(double match_rate) {
  if (!(match_rate >= 0.0 && match_rate < 1.0))
    throw OutOfRange("target match rate must lie in [0, 1)");
  return -std::log1p(-match_rate);
}

double exact_iid_match_rate(int bidders, double lambda) {
  if (bidders < 1) throw OutOfRange("need at least one bidder");
  if (!(lambda >= 0.0) || lambda > bidders) throw OutOfRange("lambda must lie in [0, n]");
  return 1.0 - std::pow(1.0 - lambda / bidders, bidders);
}

double welfare_lower_bound(double lambda) { return match_rate_lower_bound(lambda); }

std::vector<double> PriceGrid::points() const {
  if (steps < 2) throw InvalidArgument("price grid needs at least 2 steps");
  if (!(lo <= hi)) throw InvalidArgument("price grid needs lo <= hi");
  std::vector<double> pts(steps);
  const double width = hi - lo;
  for (std::size_t k = 0; k < steps; ++k)
    pts[k] = lo + width * static_cast<double>(k) / static_cast<double>(steps - 1);
  pts.back() = hi;
  return pts;
}

LossMinimum brute_force_min_loss(const MarketInstance& instance, const PriceGrid& grid,
                                 Execution execution) {
  const auto candidates =
      with_breakpoints(grid.points(), breakpoints(instance), grid.lo, grid.hi);
  std::vector<double> values(candidates.size());
  if (execution == Execution::Parallel) {
    kernels::clearing_loss_grid_parallel(instance, candidates, values);
  } else {
    kernels::clearing_loss_grid_serial(instance, candidates, values);
  }
  return pick_minimum(candidates, values);
}

LossMinimum brute_force_min_loss(const AuctionRecord& record, const LossSpec& loss,
                                 const PriceGrid& grid) {
  const auto candidates =
      with_breakpoints(grid.points(), loss_breakpoints(loss, record), grid.lo, grid.hi);
  std::vector<double> values(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k)
    values[k] = evaluate_loss(loss, candidates[k], record).value;
  return pick_minimum(candidates, values);
}

LossMinimum brute_force_min_loss(std::span<const AuctionRecord> records, const LossSpec& loss,
                                 const PriceGrid& grid, Execution execution) {
  const auto candidates = grid.points();
  std::vector<double> values(candidates.size());
  if (execution == Execution::Parallel) {
    kernels::mean_loss_grid_parallel(records, loss, candidates, values);
  } else {
    kernels::mean_loss_grid_serial(records, loss, candidates, values);
  }
  return pick_minimum(candidates, values);
}

}  // namespace clearing
