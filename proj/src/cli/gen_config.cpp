#include <yaml-cpp/yaml.h>

#include <filesystem>

#include "clearing/cli.hpp"

namespace clearing::cli {

namespace {

Distribution read_distribution(const YAML::Node& node, const std::string& where) {
  try {
    return Distribution::parse(node.as<std::string>());
  } catch (const InvalidDistributionParams& e) {
    throw InvalidDistributionParams(where + ": " + e.what());
  }
}

}  // namespace

GenConfig load_gen_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config " + path.string() + " must be a key-value map");

  GenConfig cfg;
  try {
    cfg.num_records = root["records"].as<std::size_t>(0);
    cfg.seed = root["seed"].as<std::uint64_t>(0);
    cfg.filter_top_bid_above_cost = root["filter"].as<bool>(true);
    cfg.dimension = root["dimension"].as<std::size_t>(0);

    BidDistribution default_bids;
    default_bids.bidders = root["bidders"].as<int>(5);
    if (root["bids"]) default_bids.family = read_distribution(root["bids"], "default bids");
    Distribution default_cost{PointMass{0.0}};
    if (root["cost"]) default_cost = read_distribution(root["cost"], "default cost");

    const auto contexts = root["contexts"];
    if (!contexts) {
      cfg.contexts.push_back({"default", 0, default_bids, default_cost, 1.0});
    } else {
      if (!contexts.IsSequence()) throw ConfigError("'contexts' must be a list");
      std::size_t k = 0;
      for (const auto& node : contexts) {
        ContextSpec ctx;
        ctx.id = node["id"].as<std::string>("context" + std::to_string(k));
        ctx.feature = node["feature"].as<FeatureIndex>(static_cast<FeatureIndex>(k));
        ctx.bids = default_bids;
        ctx.bids.bidders = node["bidders"].as<int>(default_bids.bidders);
        const std::string where = "context '" + ctx.id + "'";
        if (node["bids"]) ctx.bids.family = read_distribution(node["bids"], where);
        if (node["slots"]) {
          for (const auto& s : node["slots"]) ctx.bids.per_slot.push_back(read_distribution(s, where));
        }
        ctx.cost = node["cost"] ? read_distribution(node["cost"], where) : default_cost;
        ctx.weight = node["weight"].as<double>(1.0);
        cfg.contexts.push_back(std::move(ctx));
        ++k;
      }
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value in config " + path.string() + ": " + e.what());
  }
  return cfg;
}

}  // namespace clearing::cli
