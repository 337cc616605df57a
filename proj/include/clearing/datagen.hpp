#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clearing/distribution.hpp"
#include "clearing/features.hpp"

namespace clearing {

/// Bid distribution of one context: `bidders` i.i.d. draws from `family`,
/// or one draw per entry of `per_slot` for non-identical bidders.
struct BidDistribution {
  Distribution family{Uniform{0.0, 1.0}};
  std::vector<Distribution> per_slot;
  int bidders = 5;

  int bidder_count() const { return per_slot.empty() ? bidders : static_cast<int>(per_slot.size()); }
};

struct ContextSpec {
  std::string id;
  FeatureIndex feature = 0;
  BidDistribution bids;
  Distribution cost{PointMass{0.0}};
  double weight = 1.0;
};

struct GenConfig {
  std::size_t num_records = 0;
  std::vector<ContextSpec> contexts;
  std::uint64_t seed = 0;
  bool filter_top_bid_above_cost = true;
  /// Feature dimension; 0 means max context feature + 1.
  std::size_t dimension = 0;

  std::size_t resolved_dimension() const;
  /// Throws InvalidDistributionParams naming the offending context.
  void validate() const;
};

struct GeneratedData {
  Dataset data;
  std::size_t dropped = 0;
};

/// Draws num_records auctions (context by weight, bids sorted descending and
/// clipped to the top kMaxBids, then cost) and drops those with b1 < c when
/// filtering is on. Deterministic in the seed.
GeneratedData generate(const GenConfig& config);

/// One JSON object per line: {"features":{"i":v,...},"bids":[...],"cost":c}.
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Throws ParseError (malformed line) or SchemaError (missing field or broken
/// invariant). Without `dimension`, uses max feature index + 1.
Dataset read_dataset(std::istream& in, std::optional<std::size_t> dimension = std::nullopt);
Dataset read_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> dimension = std::nullopt);

}  // namespace clearing
