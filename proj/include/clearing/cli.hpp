#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "clearing/datagen.hpp"
#include "clearing/error.hpp"

namespace clearing::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reads a YAML generation config:
///
///   records: 10000
///   seed: 7
///   filter: true          # drop records with b1 < c
///   bidders: 5            # defaults shared by contexts
///   bids: uniform:0,1
///   cost: 0
///   contexts:
///     - {id: mobile, feature: 0, bids: "lognormal:0,1", weight: 2}
///     - {id: desktop, feature: 1, slots: ["uniform:0,1", "uniform:0,2"]}
///
/// Without `contexts` a single context on feature 0 is used.
GenConfig load_gen_config(const std::filesystem::path& path);

/// Runs one `clearing` invocation; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clearing::cli
