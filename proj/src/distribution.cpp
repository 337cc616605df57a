#include "clearing/distribution.hpp"

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/uniform.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "clearing/error.hpp"

namespace clearing {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double x) { return std::isfinite(x); }

std::vector<double> parse_numbers(std::string_view text, std::string_view whole) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto token = text.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
      throw InvalidDistributionParams("bad number '" + std::string(token) + "' in '" +
                                      std::string(whole) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Distribution::Distribution(Family family) : family_(family) {
  std::visit(overloaded{
                 [](const Uniform& u) {
                   if (!finite(u.lo) || !finite(u.hi) || !(u.lo < u.hi))
                     throw InvalidDistributionParams("uniform needs finite lo < hi");
                 },
                 [](const Exponential& e) {
                   if (!finite(e.rate) || !(e.rate > 0.0))
                     throw InvalidDistributionParams("exponential needs rate > 0");
                 },
                 [](const LogNormal& l) {
                   if (!finite(l.mu) || !finite(l.sigma) || !(l.sigma > 0.0))
                     throw InvalidDistributionParams("lognormal needs finite mu and sigma > 0");
                 },
                 [](const PointMass& p) {
                   if (!finite(p.value))
                     throw InvalidDistributionParams("constant must be finite");
                 },
             },
             family_);
}

Distribution Distribution::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    const auto v = parse_numbers(text, text);
    if (v.size() != 1) throw InvalidDistributionParams("expected a number: " + std::string(text));
    return Distribution(PointMass{v[0]});
  }
  const auto name = text.substr(0, colon);
  const auto args = parse_numbers(text.substr(colon + 1), text);
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw InvalidDistributionParams(std::string(name) + " takes " + std::to_string(n) +
                                      " parameter(s): " + std::string(text));
  };
  if (name == "uniform") {
    need(2);
    return Distribution(Uniform{args[0], args[1]});
  }
  if (name == "exponential" || name == "exp") {
    need(1);
    return Distribution(Exponential{args[0]});
  }
  if (name == "lognormal") {
    need(2);
    return Distribution(LogNormal{args[0], args[1]});
  }
  if (name == "const" || name == "constant") {
    need(1);
    return Distribution(PointMass{args[0]});
  }
  throw InvalidDistributionParams("unknown distribution family '" + std::string(name) + "'");
}

double Distribution::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const Uniform& u) {
            if (x <= u.lo) return 0.0;
            if (x >= u.hi) return 1.0;
            return boost::math::cdf(boost::math::uniform_distribution<>(u.lo, u.hi), x);
          },
          [x](const Exponential& e) {
            if (x <= 0.0) return 0.0;
            if (x == kInf) return 1.0;
            return boost::math::cdf(boost::math::exponential_distribution<>(e.rate), x);
          },
          [x](const LogNormal& l) {
            if (x <= 0.0) return 0.0;
            if (x == kInf) return 1.0;
            return boost::math::cdf(boost::math::lognormal_distribution<>(l.mu, l.sigma), x);
          },
          [x](const PointMass& p) { return x >= p.value ? 1.0 : 0.0; },
      },
      family_);
}

double Distribution::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw OutOfRange("quantile level must lie in [0, 1]");
  return std::visit(
      overloaded{
          [q](const Uniform& u) {
            return boost::math::quantile(boost::math::uniform_distribution<>(u.lo, u.hi), q);
          },
          [q](const Exponential& e) {
            if (q == 1.0) return kInf;
            return boost::math::quantile(boost::math::exponential_distribution<>(e.rate), q);
          },
          [q](const LogNormal& l) {
            if (q == 0.0) return 0.0;
            if (q == 1.0) return kInf;
            return boost::math::quantile(boost::math::lognormal_distribution<>(l.mu, l.sigma), q);
          },
          [](const PointMass& p) { return p.value; },
      },
      family_);
}

double Distribution::sample(Rng& rng) const {
  return std::visit(overloaded{
                        [&rng](const Uniform& u) {
                          return std::uniform_real_distribution<double>(u.lo, u.hi)(rng);
                        },
                        [&rng](const Exponential& e) {
                          return std::exponential_distribution<double>(e.rate)(rng);
                        },
                        [&rng](const LogNormal& l) {
                          return std::lognormal_distribution<double>(l.mu, l.sigma)(rng);
                        },
                        [](const PointMass& p) { return p.value; },
                    },
                    family_);
}

double Distribution::support_lo() const {
  return std::visit(overloaded{
                        [](const Uniform& u) { return u.lo; },
                        [](const Exponential&) { return 0.0; },
                        [](const LogNormal&) { return 0.0; },
                        [](const PointMass& p) { return p.value; },
                    },
                    family_);
}

double Distribution::support_hi() const {
  return std::visit(overloaded{
                        [](const Uniform& u) { return u.hi; },
                        [](const Exponential&) { return kInf; },
                        [](const LogNormal&) { return kInf; },
                        [](const PointMass& p) { return p.value; },
                    },
                    family_);
}

std::string Distribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&os](const Uniform& u) { os << "uniform:" << u.lo << ',' << u.hi; },
                 [&os](const Exponential& e) { os << "exponential:" << e.rate; },
                 [&os](const LogNormal& l) { os << "lognormal:" << l.mu << ',' << l.sigma; },
                 [&os](const PointMass& p) { os << "const:" << p.value; },
             },
             family_);
  return os.str();
}

}  // namespace clearing
