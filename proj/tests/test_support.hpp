#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "clearing/datagen.hpp"
#include "clearing/features.hpp"
#include "clearing/market.hpp"

namespace clearing::testing {

inline std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::path(CLEARING_TEST_TMP) / name;
}

inline MarketInstance fig1_market() {
  return {{{1, 1}, {4, 1}, {5, 2}}, {{2, 1}, {3, 1}}};
}

/// Random instance with n, m <= max_orders, quantities in [0, 3], prices in [0, 10].
inline MarketInstance random_market(std::mt19937_64& rng, int max_orders = 10) {
  std::uniform_int_distribution<int> count(0, max_orders);
  std::uniform_real_distribution<double> price(0.0, 10.0);
  std::uniform_real_distribution<double> qty(0.0, 3.0);
  MarketInstance m;
  const int n = count(rng);
  const int k = count(rng);
  for (int i = 0; i < n; ++i) m.buyers.push_back({price(rng), qty(rng)});
  for (int j = 0; j < k; ++j) m.sellers.push_back({price(rng), qty(rng)});
  return m;
}

/// Integer prices and quantities: the LP optimum is attained at an integral
/// allocation, so exhaustive enumeration is an exact oracle.
inline MarketInstance random_integer_market(std::mt19937_64& rng, int max_orders = 3) {
  std::uniform_int_distribution<int> count(0, max_orders);
  std::uniform_int_distribution<int> price(0, 8);
  std::uniform_int_distribution<int> qty(0, 2);
  MarketInstance m;
  const int n = count(rng);
  const int k = count(rng);
  for (int i = 0; i < n; ++i) m.buyers.push_back({double(price(rng)), double(qty(rng))});
  for (int j = 0; j < k; ++j) m.sellers.push_back({double(price(rng)), double(qty(rng))});
  return m;
}

/// Max gains from trade by enumerating every integral allocation.
inline double enumerate_gains(const MarketInstance& m) {
  std::vector<int> caps;
  for (const auto& b : m.buyers) caps.push_back(static_cast<int>(b.quantity));
  for (const auto& s : m.sellers) caps.push_back(static_cast<int>(s.quantity));
  std::vector<int> x(caps.size(), 0);
  double best = 0.0;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == caps.size()) {
      double bought = 0, sold = 0, value = 0;
      for (std::size_t i = 0; i < m.buyers.size(); ++i) {
        bought += x[i];
        value += m.buyers[i].bid * x[i];
      }
      for (std::size_t j = 0; j < m.sellers.size(); ++j) {
        sold += x[m.buyers.size() + j];
        value -= m.sellers[j].ask * x[m.buyers.size() + j];
      }
      if (bought == sold) best = std::max(best, value);
      return;
    }
    for (int q = 0; q <= caps[k]; ++q) {
      x[k] = q;
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

/// Clearing-loss minimizers found on a fine grid (tests only).
inline std::pair<double, double> grid_minimizers(const MarketInstance& m, double lo, double hi,
                                                 double step) {
  auto loss = [&](double p) {
    double v = 0;
    for (const auto& b : m.buyers) v += b.quantity * std::max(b.bid - p, 0.0);
    for (const auto& s : m.sellers) v += s.quantity * std::max(p - s.ask, 0.0);
    return v;
  };
  double best = loss(lo);
  for (double p = lo; p <= hi + 1e-12; p += step) best = std::min(best, loss(p));
  double first = hi, last = lo;
  for (double p = lo; p <= hi + 1e-12; p += step) {
    if (loss(p) <= best + 1e-9) {
      first = std::min(first, p);
      last = std::max(last, p);
    }
  }
  return {first, last};
}

inline AuctionRecord make_record(std::vector<double> bids, double cost,
                                 std::size_t dimension = 1, FeatureIndex feature = 0) {
  std::sort(bids.begin(), bids.end(), std::greater<>());
  return {FeatureVector::one_hot(dimension, feature), std::move(bids), cost};
}

inline GenConfig iid_config(std::size_t records, Distribution bids, int bidders,
                            std::uint64_t seed) {
  GenConfig cfg;
  cfg.num_records = records;
  cfg.seed = seed;
  ContextSpec ctx;
  ctx.id = "all";
  ctx.feature = 0;
  ctx.bids.family = bids;
  ctx.bids.bidders = bidders;
  cfg.contexts.push_back(ctx);
  return cfg;
}

}  // namespace clearing::testing
