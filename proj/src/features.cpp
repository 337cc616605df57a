#include "clearing/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clearing/error.hpp"

namespace clearing {

FeatureVector::FeatureVector(std::size_t dimension, std::vector<FeatureEntry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& e = entries_[k];
    if (e.index >= dimension_) throw DimensionMismatch(dimension_, std::size_t{e.index} + 1);
    if (k > 0 && entries_[k - 1].index == e.index)
      throw InvalidArgument("duplicate feature index " + std::to_string(e.index));
    if (!std::isfinite(e.value))
      throw InvalidArgument("non-finite value for feature " + std::to_string(e.index));
  }
}

FeatureVector FeatureVector::one_hot(std::size_t dimension, FeatureIndex index, double value) {
  return FeatureVector(dimension, {{index, value}});
}

FeatureVector FeatureVector::with_dimension(std::size_t dimension) const {
  return FeatureVector(dimension, entries_);
}

double AuctionRecord::clearing_floor() const { return std::max(second_bid(), cost); }

}  // namespace clearing
