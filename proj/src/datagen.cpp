#include "clearing/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <string>

#include "clearing/error.hpp"

namespace clearing {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_nonnegative(const ContextSpec& ctx, const Distribution& d, const char* what) {
  if (d.support_lo() < 0.0)
    throw InvalidDistributionParams("context '" + ctx.id + "': " + what + " distribution " +
                                    d.describe() + " can produce negative values");
}

}  // namespace

std::size_t GenConfig::resolved_dimension() const {
  if (dimension != 0) return dimension;
  std::size_t dim = 1;
  for (const auto& c : contexts) dim = std::max(dim, std::size_t{c.feature} + 1);
  return dim;
}

void GenConfig::validate() const {
  if (contexts.empty()) throw InvalidDistributionParams("no contexts configured");
  std::set<FeatureIndex> seen;
  double total_weight = 0.0;
  for (const auto& ctx : contexts) {
    if (!seen.insert(ctx.feature).second)
      throw InvalidDistributionParams("context '" + ctx.id + "': feature index " +
                                      std::to_string(ctx.feature) + " already used");
    if (dimension != 0 && ctx.feature >= dimension)
      throw InvalidDistributionParams("context '" + ctx.id + "': feature index exceeds dimension");
    if (ctx.bids.per_slot.empty() && ctx.bids.bidders < 1)
      throw InvalidDistributionParams("context '" + ctx.id + "': needs at least one bidder");
    if (!(ctx.weight >= 0.0) || !std::isfinite(ctx.weight))
      throw InvalidDistributionParams("context '" + ctx.id + "': weight must be >= 0");
    total_weight += ctx.weight;
    check_nonnegative(ctx, ctx.bids.family, "bid");
    for (const auto& d : ctx.bids.per_slot) check_nonnegative(ctx, d, "bid");
    check_nonnegative(ctx, ctx.cost, "cost");
  }
  if (!(total_weight > 0.0)) throw InvalidDistributionParams("context weights sum to zero");
}

GeneratedData generate(const GenConfig& config) {
  config.validate();
  GeneratedData out;
  out.data.dimension = config.resolved_dimension();
  out.data.records.reserve(config.num_records);

  Rng rng(config.seed);
  std::vector<double> weights;
  for (const auto& c : config.contexts) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  std::vector<double> bids;
  for (std::size_t k = 0; k < config.num_records; ++k) {
    const auto& ctx = config.contexts[pick(rng)];
    bids.clear();
    if (ctx.bids.per_slot.empty()) {
      for (int i = 0; i < ctx.bids.bidders; ++i) bids.push_back(ctx.bids.family.sample(rng));
    } else {
      for (const auto& d : ctx.bids.per_slot) bids.push_back(d.sample(rng));
    }
    std::sort(bids.begin(), bids.end(), std::greater<>());
    if (bids.size() > kMaxBids) bids.resize(kMaxBids);
    const double cost = ctx.cost.sample(rng);
    if (config.filter_top_bid_above_cost && bids.front() < cost) {
      ++out.dropped;
      continue;
    }
    out.data.records.push_back(
        {FeatureVector::one_hot(out.data.dimension, ctx.feature), bids, cost});
  }
  return out;
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (const auto& rec : data.records) {
    ordered_json features = ordered_json::object();
    for (const auto& e : rec.features.entries()) features[std::to_string(e.index)] = e.value;
    ordered_json line;
    line["features"] = std::move(features);
    line["bids"] = rec.bids;
    line["cost"] = rec.cost;
    out << line.dump() << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset(out, data);
  if (!out) throw Error("failed writing dataset " + path.string());
}

namespace {

double read_amount(const nlohmann::json& v, std::size_t line, const std::string& what) {
  if (!v.is_number()) throw SchemaError(line, what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < 0.0) throw SchemaError(line, what + " must be finite and >= 0");
  return x;
}

}  // namespace

Dataset read_dataset(std::istream& in, std::optional<std::size_t> dimension) {
  struct Raw {
    std::vector<FeatureEntry> entries;
    std::vector<double> bids;
    double cost;
    std::size_t line;
  };
  std::vector<Raw> raw;
  std::size_t max_index_plus_one = 1;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
    for (const char* field : {"features", "bids", "cost"}) {
      if (!j.contains(field)) throw SchemaError(line, std::string("missing field '") + field + "'");
    }
    Raw r;
    r.line = line;
    const auto& f = j["features"];
    if (!f.is_object()) throw SchemaError(line, "features must be an index:value object");
    for (const auto& [key, value] : f.items()) {
      std::size_t idx = 0;
      const auto res = std::from_chars(key.data(), key.data() + key.size(), idx);
      if (key.empty() || res.ec != std::errc() || res.ptr != key.data() + key.size() ||
          idx > std::numeric_limits<FeatureIndex>::max())
        throw SchemaError(line, "bad feature index '" + key + "'");
      if (!value.is_number()) throw SchemaError(line, "feature " + key + " value must be a number");
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw SchemaError(line, "feature " + key + " value is not finite");
      r.entries.push_back({static_cast<FeatureIndex>(idx), v});
      max_index_plus_one = std::max(max_index_plus_one, idx + 1);
    }
    const auto& b = j["bids"];
    if (!b.is_array() || b.empty()) throw SchemaError(line, "bids must be a nonempty array");
    for (const auto& v : b) r.bids.push_back(read_amount(v, line, "bid"));
    if (!std::is_sorted(r.bids.begin(), r.bids.end(), std::greater<>()))
      throw SchemaError(line, "bids must be sorted in descending order");
    r.cost = read_amount(j["cost"], line, "cost");
    raw.push_back(std::move(r));
  }

  Dataset data;
  data.dimension = dimension.value_or(max_index_plus_one);
  if (data.dimension < max_index_plus_one)
    throw DimensionMismatch(data.dimension, max_index_plus_one);
  data.records.reserve(raw.size());
  for (auto& r : raw) {
    try {
      data.records.push_back(
          {FeatureVector(data.dimension, std::move(r.entries)), std::move(r.bids), r.cost});
    } catch (const InvalidArgument& e) {
      throw SchemaError(r.line, e.what());
    }
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path, std::optional<std::size_t> dimension) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset " + path.string());
  return read_dataset(in, dimension);
}

}  // namespace clearing
