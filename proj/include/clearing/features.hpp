#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace clearing {

using FeatureIndex = std::uint32_t;

struct FeatureEntry {
  FeatureIndex index = 0;
  double value = 0.0;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sparse feature vector z. Entries are kept strictly increasing by index.
class FeatureVector {
 public:
  FeatureVector() = default;

  /// Sorts the entries; throws InvalidArgument on duplicate or out-of-range
  /// indices and on non-finite values.
  FeatureVector(std::size_t dimension, std::vector<FeatureEntry> entries);

  static FeatureVector one_hot(std::size_t dimension, FeatureIndex index, double value = 1.0);

  std::size_t dimension() const { return dimension_; }
  std::span<const FeatureEntry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  /// Same entries, different dimension. Throws DimensionMismatch if an index
  /// does not fit.
  FeatureVector with_dimension(std::size_t dimension) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<FeatureEntry> entries_;
};

inline constexpr std::size_t kMaxBids = 5;

/// One contextual second-price auction: features z, bids sorted descending,
/// and the seller's cost c.
struct AuctionRecord {
  FeatureVector features;
  std::vector<double> bids;
  double cost = 0.0;

  double top_bid() const { return bids.empty() ? 0.0 : bids[0]; }
  /// Second-highest bid, 0 for single-bid records.
  double second_bid() const { return bids.size() < 2 ? 0.0 : bids[1]; }
  /// Second-price payment without reserve: max{b2, c}.
  double clearing_floor() const;

  friend bool operator==(const AuctionRecord&, const AuctionRecord&) = default;
};

/// A set of records sharing one feature dimension.
struct Dataset {
  std::size_t dimension = 0;
  std::vector<AuctionRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

}  // namespace clearing
