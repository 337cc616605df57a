#pragma once

#include <random>
#include <string>
#include <string_view>
#include <variant>

namespace clearing {

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

struct Exponential {
  double rate = 1.0;
};

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

/// All mass at one value (a constant cost, for instance).
struct PointMass {
  double value = 0.0;
};

using Rng = std::mt19937_64;

/// A univariate distribution over prices.
class Distribution {
 public:
  using Family = std::variant<Uniform, Exponential, LogNormal, PointMass>;

  /// Throws InvalidDistributionParams when the parameters are outside the
  /// family's valid range.
  explicit Distribution(Family family);
  Distribution() : Distribution(PointMass{0.0}) {}

  /// Parses "uniform:lo,hi", "exponential:rate", "lognormal:mu,sigma" or
  /// "const:v" (a bare number is also read as a constant).
  static Distribution parse(std::string_view text);

  const Family& family() const { return family_; }

  double cdf(double x) const;
  /// Inverse CDF; q = 1 on an unbounded support yields +infinity.
  double quantile(double q) const;
  double sample(Rng& rng) const;

  double support_lo() const;
  double support_hi() const;
  bool is_point_mass() const { return std::holds_alternative<PointMass>(family_); }

  std::string describe() const;

 private:
  Family family_;
};

}  // namespace clearing
