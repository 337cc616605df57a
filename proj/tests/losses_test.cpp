#include "clearing/losses.hpp"

#include <gtest/gtest.h>

#include <random>

#include "clearing/error.hpp"
#include "test_support.hpp"

namespace clearing {
namespace {

using testing::fig1_market;
using testing::make_record;

TEST(ClearingLoss, Examples) {
  EXPECT_DOUBLE_EQ(clearing_loss(4.0, fig1_market()).value, 5.0);

  const MarketInstance single{{{7.5, 1}}, {}};
  const auto v = clearing_loss(0.0, single);
  EXPECT_DOUBLE_EQ(v.value, 7.5);
  EXPECT_DOUBLE_EQ(v.subgradient, -1.0);

  auto tilted = fig1_market();
  tilted.buyers.push_back({6, 1});
  EXPECT_DOUBLE_EQ(clearing_loss(6.0, tilted).value, 7.0);
  const auto [first, last] = testing::grid_minimizers(tilted, 0.0, 8.0, 0.25);
  EXPECT_EQ(first, 5.0);
  EXPECT_EQ(last, 5.0);
}

TEST(ClearingLoss, KinkTakesZeroContribution) {
  // At p = 4 the buyer bidding 4 and the sellers below contribute by strict indicators.
  EXPECT_DOUBLE_EQ(clearing_loss(4.0, fig1_market()).subgradient, -2.0 + 2.0);
  EXPECT_DOUBLE_EQ(clearing_loss(5.0, fig1_market()).subgradient, 2.0);
}

TEST(AuctionClearingLoss, Examples) {
  const auto rec = make_record({5, 3}, 1.0);
  EXPECT_DOUBLE_EQ(auction_clearing_loss(4.0, rec, 1.0).value, 4.0);
  EXPECT_DOUBLE_EQ(auction_clearing_loss(0.5, rec, 1.0).subgradient, -2.0);
  EXPECT_DOUBLE_EQ(auction_clearing_loss(5.0, rec, 0.0).value, 0.0);
  EXPECT_DOUBLE_EQ(auction_clearing_loss(9.0, rec, 0.0).value, 0.0);
}

TEST(AuctionClearingLoss, EqualsMarketClearingLoss) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    const auto rec = make_record({u(rng), u(rng), u(rng)}, u(rng));
    const double lambda = u(rng) / 5.0;
    const double p = u(rng) * 1.2 - 1.0;
    const auto a = auction_clearing_loss(p, rec, lambda);
    const auto b = clearing_loss(p, to_market(rec, lambda));
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.subgradient, b.subgradient);
  }
}

TEST(SquaredLoss, Examples) {
  auto v = squared_loss(3.0, 5.0);
  EXPECT_EQ(v.value, 4.0);
  EXPECT_EQ(v.subgradient, -4.0);
  v = squared_loss(2.0, 2.0);
  EXPECT_EQ(v.value, 0.0);
  EXPECT_EQ(v.subgradient, 0.0);
  v = squared_loss(0.0, 2.0);
  EXPECT_EQ(v.value, 4.0);
  EXPECT_EQ(v.subgradient, -4.0);
}

TEST(SquaredLoss, TargetSelection) {
  EXPECT_EQ(squared_target(LossKind::SquaredTopBid, make_record({5, 3}, 1)), 5.0);
  EXPECT_EQ(squared_target(LossKind::SquaredSecondBid, make_record({5, 3}, 1)), 3.0);
  EXPECT_EQ(squared_target(LossKind::SquaredSecondBid, make_record({5}, 1.5)), 1.5);
  EXPECT_THROW(squared_target(LossKind::Clearing, make_record({5}, 1)), WrongLossKind);
}

TEST(SurrogateLoss, Examples) {
  const auto rec = make_record({5, 3}, 1.0);
  EXPECT_DOUBLE_EQ(-surrogate_revenue_loss(4.0, rec, 0.75).value, 4.0);
  EXPECT_DOUBLE_EQ(surrogate_revenue_loss(4.0, rec, 0.75).subgradient, -1.0);
  EXPECT_DOUBLE_EQ(-surrogate_revenue_loss(11.0, rec, 1.0).value, 1.0);
  EXPECT_DOUBLE_EQ(surrogate_revenue_loss(11.0, rec, 1.0).subgradient, 0.0);
  EXPECT_DOUBLE_EQ(-surrogate_revenue_loss(7.5, rec, 1.0).value, 2.5);
  EXPECT_DOUBLE_EQ(surrogate_revenue_loss(7.5, rec, 1.0).subgradient, 1.0);
  // Flat below the second-price floor.
  EXPECT_DOUBLE_EQ(-surrogate_revenue_loss(2.0, rec, 1.0).value, 3.0);
  EXPECT_DOUBLE_EQ(surrogate_revenue_loss(2.0, rec, 1.0).subgradient, 0.0);
}

TEST(SurrogateLoss, SingleBidUsesCostAsFloor) {
  const auto rec = make_record({5}, 2.0);
  EXPECT_DOUBLE_EQ(-surrogate_revenue_loss(1.0, rec, 1.0).value, 2.0);
}

TEST(SurrogateLoss, ApproachesRevenueLossAsGammaShrinks) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    const double top = u(rng) + 0.1;
    const auto rec = make_record({top, top * 0.5}, top * 0.3);
    const double p = u(rng) * 2.0;
    if (p == top) continue;
    double prev = std::abs(surrogate_revenue_loss(p, rec, 1e-1).value - revenue_loss(p, rec));
    for (double gamma : {1e-2, 1e-3}) {
      const double gap = std::abs(surrogate_revenue_loss(p, rec, gamma).value - revenue_loss(p, rec));
      EXPECT_LE(gap, prev);
      prev = gap;
    }
  }
}

TEST(RevenueLoss, Examples) {
  const auto rec = make_record({5, 3}, 1.0);
  EXPECT_EQ(-revenue_loss(4.0, rec), 4.0);
  EXPECT_EQ(-revenue_loss(6.0, rec), 1.0);
  EXPECT_EQ(-revenue_loss(0.0, rec), 3.0);
}

TEST(Regularized, Examples) {
  auto v = regularized({2.0, 0.0}, 5.0, 3.0, 0.5);
  EXPECT_EQ(v.value, 3.0);
  EXPECT_EQ(v.subgradient, 0.5);
  v = regularized({2.0, -1.0}, 2.0, 3.0, 0.5);
  EXPECT_EQ(v.value, 2.0);
  EXPECT_EQ(v.subgradient, -1.0);
  v = regularized({2.0, -1.0}, 5.0, 3.0, 0.0);
  EXPECT_EQ(v.value, 2.0);
  EXPECT_EQ(v.subgradient, -1.0);
}

TEST(EvaluateLoss, ClearingDoesNotAddRegularizerTwice) {
  const auto rec = make_record({5, 3}, 1.0);
  const auto v = evaluate_loss(LossSpec::clearing(1.0), 4.0, rec);
  EXPECT_EQ(v.value, 4.0);
  const auto sq = evaluate_loss(LossSpec::squared_top_bid(0.5), 4.0, rec);
  EXPECT_EQ(sq.value, 1.0 + 1.5);
}

TEST(LossSpec, Validation) {
  EXPECT_NO_THROW(LossSpec::clearing(0.25).validate());
  EXPECT_THROW(LossSpec::clearing(-1.0).validate(), InvalidArgument);
  EXPECT_THROW((LossSpec{LossKind::SurrogateRevenue, 0.0, std::nullopt}.validate()),
               InvalidArgument);
  EXPECT_THROW(LossSpec::surrogate(0.0).validate(), InvalidArgument);
  EXPECT_THROW((LossSpec{LossKind::Clearing, 1.0, 0.5}.validate()), InvalidArgument);
  EXPECT_FALSE(LossSpec::revenue().trainable());
  EXPECT_EQ(parse_loss_kind("sq-b2"), LossKind::SquaredSecondBid);
  EXPECT_FALSE(parse_loss_kind("hinge"));
}

// Properties of the convex clearing loss on random multi-unit markets.
class ClearingLossProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{17};
  std::uniform_real_distribution<double> price{-2.0, 12.0};
  std::uniform_real_distribution<double> unit{0.0, 1.0};
};

TEST_F(ClearingLossProperties, Convexity) {
  for (int t = 0; t < 2000; ++t) {
    const auto m = testing::random_market(rng);
    const double p1 = price(rng), p2 = price(rng), w = unit(rng);
    const double lhs = clearing_loss(w * p1 + (1 - w) * p2, m).value;
    const double rhs = w * clearing_loss(p1, m).value + (1 - w) * clearing_loss(p2, m).value;
    EXPECT_LE(lhs, rhs + 1e-9);
  }
}

TEST_F(ClearingLossProperties, SubgradientBracketedByOneSidedDifferences) {
  const double h = 1e-6;
  for (int t = 0; t < 2000; ++t) {
    const auto m = testing::random_market(rng);
    // Half the probes sit exactly on a kink.
    double p = price(rng);
    if (t % 2 == 0 && !m.buyers.empty()) p = m.buyers[0].bid;
    const auto v = clearing_loss(p, m);
    const double left = (v.value - clearing_loss(p - h, m).value) / h;
    const double right = (clearing_loss(p + h, m).value - v.value) / h;
    EXPECT_LE(left, v.subgradient + 1e-4);
    EXPECT_GE(right, v.subgradient - 1e-4);
  }
}

TEST_F(ClearingLossProperties, SubgradientMonotoneAndBounded) {
  for (int t = 0; t < 500; ++t) {
    const auto m = testing::random_market(rng);
    double bound = 0;
    for (const auto& b : m.buyers) bound += b.quantity;
    for (const auto& s : m.sellers) bound += s.quantity;
    double prev = -bound - 1.0;
    for (double p = -1.0; p <= 11.0; p += 0.05) {
      const double g = clearing_loss(p, m).subgradient;
      EXPECT_GE(g, prev - 1e-12);
      EXPECT_LE(std::abs(g), bound + 1e-12);
      prev = g;
    }
  }
}

TEST_F(ClearingLossProperties, SubgradientIgnoresOutlierMagnitude) {
  MarketInstance m = fig1_market();
  const double before = clearing_loss(4.5, m).subgradient;
  m.buyers[2].bid = 1e12;
  EXPECT_EQ(clearing_loss(4.5, m).subgradient, before);
}

TEST(LossGradients, CentralDifferencesAwayFromKinks) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const std::vector<LossKind> kinds{LossKind::Clearing, LossKind::SquaredTopBid,
                                    LossKind::SquaredSecondBid, LossKind::SurrogateRevenue};
  const double h = 1e-6;
  int checked = 0;
  while (checked < 2000) {
    LossSpec spec{kinds[rng() % kinds.size()], u(rng) / 5.0, std::nullopt};
    if (spec.kind == LossKind::SurrogateRevenue) spec.gamma = 0.25 + u(rng) / 10.0;
    const auto rec = make_record({u(rng), u(rng), u(rng)}, u(rng) / 4.0);
    const double p = u(rng) * 1.5 - 1.0;
    bool near_kink = false;
    for (double k : loss_breakpoints(spec, rec)) near_kink |= std::abs(p - k) <= 1e-4;
    if (near_kink) continue;
    const double fd = (evaluate_loss(spec, p + h, rec).value - evaluate_loss(spec, p - h, rec).value) /
                      (2 * h);
    EXPECT_NEAR(evaluate_loss(spec, p, rec).subgradient, fd, 1e-4);
    ++checked;
  }
}

}  // namespace
}  // namespace clearing
