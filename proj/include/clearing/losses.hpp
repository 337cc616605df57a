#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "clearing/features.hpp"
#include "clearing/market.hpp"

namespace clearing {

enum class LossKind { Clearing, SquaredTopBid, SquaredSecondBid, SurrogateRevenue, Revenue };

std::string_view to_string(LossKind kind);
/// Accepts the CLI spellings: clearing, sq-b1, sq-b2, surrogate, revenue.
std::optional<LossKind> parse_loss_kind(std::string_view name);

/// Which loss to fit and its parameters. For Clearing, `lambda` is the seller
/// quantity; for every other kind it weights an added lambda * [p - c]+ term.
struct LossSpec {
  LossKind kind = LossKind::Clearing;
  double lambda = 0.0;
  std::optional<double> gamma;

  static LossSpec clearing(double lambda) { return {LossKind::Clearing, lambda, std::nullopt}; }
  static LossSpec squared_top_bid(double lambda = 0.0) {
    return {LossKind::SquaredTopBid, lambda, std::nullopt};
  }
  static LossSpec squared_second_bid(double lambda = 0.0) {
    return {LossKind::SquaredSecondBid, lambda, std::nullopt};
  }
  static LossSpec surrogate(double gamma, double lambda = 0.0) {
    return {LossKind::SurrogateRevenue, lambda, gamma};
  }
  static LossSpec revenue() { return {LossKind::Revenue, 0.0, std::nullopt}; }

  /// Throws InvalidArgument if lambda < 0, or gamma is missing/nonpositive for
  /// the surrogate, or gamma is given for another kind.
  void validate() const;
  bool trainable() const { return kind != LossKind::Revenue; }
};

/// Loss value together with one element of its subdifferential in the price.
struct LossValue {
  double value = 0.0;
  double subgradient = 0.0;
};

/// sum_i mu_i [b_i - p]+ + sum_j lambda_j [p - c_j]+.
/// Kinks take the zero contribution (strict indicators).
LossValue clearing_loss(double price, const MarketInstance& instance);

/// Clearing loss of a unit-demand auction with one seller (c, lambda).
LossValue auction_clearing_loss(double price, const AuctionRecord& record, double lambda);

/// The unit-demand auction viewed as a market instance.
MarketInstance to_market(const AuctionRecord& record, double lambda);

LossValue squared_loss(double price, double target);

/// Target used by the squared loss of `kind`: b1, or b2 (c for single-bid records).
double squared_target(LossKind kind, const AuctionRecord& record);

/// Continuous revenue surrogate with slope parameter gamma; returns the loss
/// (negated surrogate revenue).
LossValue surrogate_revenue_loss(double price, const AuctionRecord& record, double gamma);

/// Negated second-price revenue with reserve p. No gradient.
double revenue_loss(double price, const AuctionRecord& record);

/// Adds lambda * [p - c]+ and lambda * 1[p > c].
LossValue regularized(LossValue base, double price, double cost, double lambda);

/// Full training loss of `spec` (regularizer included exactly once).
/// For Revenue the value is returned with a zero subgradient.
LossValue evaluate_loss(const LossSpec& spec, double price, const AuctionRecord& record);

/// Prices where the loss of `spec` on `record` has a kink or jump.
std::vector<double> loss_breakpoints(const LossSpec& spec, const AuctionRecord& record);

}  // namespace clearing
