#include "clearing/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clearing/error.hpp"

namespace clearing {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Clearing: return "clearing";
    case LossKind::SquaredTopBid: return "sq-b1";
    case LossKind::SquaredSecondBid: return "sq-b2";
    case LossKind::SurrogateRevenue: return "surrogate";
    case LossKind::Revenue: return "revenue";
  }
  return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (auto kind : {LossKind::Clearing, LossKind::SquaredTopBid, LossKind::SquaredSecondBid,
                    LossKind::SurrogateRevenue, LossKind::Revenue}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

void LossSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("lambda must be a finite value >= 0");
  if (kind == LossKind::SurrogateRevenue) {
    if (!gamma) throw InvalidArgument("surrogate loss requires gamma");
    if (!(*gamma > 0.0) || !std::isfinite(*gamma))
      throw InvalidArgument("gamma must be a finite value > 0");
  } else if (gamma) {
    throw InvalidArgument("gamma only applies to the surrogate loss");
  }
}

LossValue clearing_loss(double price, const MarketInstance& instance) {
  LossValue out;
  for (const auto& b : instance.buyers) {
    if (b.bid > price) {
      out.value += b.quantity * (b.bid - price);
      out.subgradient -= b.quantity;
    }
  }
  for (const auto& s : instance.sellers) {
    if (price > s.ask) {
      out.value += s.quantity * (price - s.ask);
      out.subgradient += s.quantity;
    }
  }
  return out;
}

LossValue auction_clearing_loss(double price, const AuctionRecord& record, double lambda) {
  LossValue out;
  for (double b : record.bids) {
    if (b > price) {
      out.value += b - price;
      out.subgradient -= 1.0;
    }
  }
  if (price > record.cost) {
    out.value += lambda * (price - record.cost);
    out.subgradient += lambda;
  }
  return out;
}

MarketInstance to_market(const AuctionRecord& record, double lambda) {
  MarketInstance m;
  m.buyers.reserve(record.bids.size());
  for (double b : record.bids) m.buyers.push_back({b, 1.0});
  m.sellers.push_back({record.cost, lambda});
  return m;
}

LossValue squared_loss(double price, double target) {
  const double d = price - target;
  return {d * d, 2.0 * d};
}

double squared_target(LossKind kind, const AuctionRecord& record) {
  if (kind == LossKind::SquaredTopBid) return record.top_bid();
  if (kind == LossKind::SquaredSecondBid)
    return record.bids.size() < 2 ? record.cost : record.bids[1];
  throw WrongLossKind("squared_target needs a squared loss kind, got " +
                      std::string(to_string(kind)));
}

LossValue surrogate_revenue_loss(double price, const AuctionRecord& record, double gamma) {
  const double top = record.top_bid();
  const double floor = record.clearing_floor();
  const double cutoff = (1.0 + gamma) * top;
  if (price <= top) {
    if (price > floor) return {-price, -1.0};
    return {-floor, 0.0};
  }
  if (price > cutoff) return {-record.cost, 0.0};
  return {-(cutoff - price) / gamma, 1.0 / gamma};
}

double revenue_loss(double price, const AuctionRecord& record) {
  if (std::max(price, record.cost) <= record.top_bid())
    return -std::max(price, record.clearing_floor());
  return -record.cost;
}

LossValue regularized(LossValue base, double price, double cost, double lambda) {
  if (price > cost) {
    base.value += lambda * (price - cost);
    base.subgradient += lambda;
  }
  return base;
}

LossValue evaluate_loss(const LossSpec& spec, double price, const AuctionRecord& record) {
  switch (spec.kind) {
    case LossKind::Clearing:
      return auction_clearing_loss(price, record, spec.lambda);
    case LossKind::SquaredTopBid:
    case LossKind::SquaredSecondBid:
      return regularized(squared_loss(price, squared_target(spec.kind, record)), price,
                         record.cost, spec.lambda);
    case LossKind::SurrogateRevenue:
      return regularized(surrogate_revenue_loss(price, record, spec.gamma.value_or(1.0)), price,
                         record.cost, spec.lambda);
    case LossKind::Revenue:
      return regularized({revenue_loss(price, record), 0.0}, price, record.cost, spec.lambda);
  }
  return {};
}

std::vector<double> loss_breakpoints(const LossSpec& spec, const AuctionRecord& record) {
  std::vector<double> pts{record.cost};
  switch (spec.kind) {
    case LossKind::Clearing:
      pts.insert(pts.end(), record.bids.begin(), record.bids.end());
      break;
    case LossKind::SquaredTopBid:
    case LossKind::SquaredSecondBid:
      pts.push_back(squared_target(spec.kind, record));
      break;
    case LossKind::SurrogateRevenue:
      pts.push_back(record.clearing_floor());
      pts.push_back(record.top_bid());
      pts.push_back((1.0 + spec.gamma.value_or(1.0)) * record.top_bid());
      break;
    case LossKind::Revenue:
      pts.push_back(record.clearing_floor());
      pts.push_back(record.top_bid());
      break;
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace clearing
