#include "clearing/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "clearing/error.hpp"
#include "clearing/kernels.hpp"
#include "clearing/text.hpp"
#include "clearing/theory.hpp"

namespace clearing {

namespace {

double ratio(double value, double baseline) {
  if (baseline == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return value / baseline;
}

double median_top_bid(const Dataset& data) {
  std::vector<double> tops;
  tops.reserve(data.size());
  for (const auto& r : data.records) tops.push_back(r.top_bid());
  const std::size_t mid = tops.size() / 2;
  std::nth_element(tops.begin(), tops.begin() + mid, tops.end());
  if (tops.size() % 2 == 1) return tops[mid];
  const double upper = tops[mid];
  const double lower = *std::max_element(tops.begin(), tops.begin() + mid);
  return 0.5 * (lower + upper);
}

std::string context_key(const FeatureVector& z) {
  std::string key;
  for (const auto& e : z.entries()) {
    if (!key.empty()) key += '+';
    key += std::to_string(e.index);
  }
  return key.empty() ? "none" : key;
}

std::vector<ContextMatchRate> per_context(const Dataset& data, std::span<const double> prices) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    auto& c = counts[context_key(r.features)];
    ++c.first;
    c.second += r.top_bid() >= std::max(prices[i], r.cost);
  }
  std::vector<ContextMatchRate> out;
  for (const auto& [key, c] : counts)
    out.push_back({key, c.first, static_cast<double>(c.second) / static_cast<double>(c.first)});
  return out;
}

}  // namespace

AuctionOutcome simulate_auction(const AuctionRecord& record, double price) {
  if (record.bids.empty()) throw EmptyBids();
  const double top = record.top_bid();
  if (top >= std::max(price, record.cost)) {
    const double payment = std::max(record.clearing_floor(), price);
    return {true, payment, top, top - payment};
  }
  return {false, record.cost, 0.0, 0.0};
}

MetricsReport evaluate_prices(const Dataset& data, std::span<const double> prices,
                              const EvalOptions& options) {
  if (data.empty()) throw InvalidArgument("evaluation dataset is empty");
  if (prices.size() != data.size()) throw InvalidArgument("one price per record is required");
  for (const auto& r : data.records) {
    if (r.bids.empty()) throw EmptyBids();
  }

  kernels::OutcomeOptions opts;
  opts.strict_exchange_revenue = options.strict_exchange_revenue;
  opts.median_top_bid = median_top_bid(data);
  std::span<const AuctionRecord> records(data.records);
  const auto totals = kernels::outcome_totals(records, prices, opts, options.execution);
  const std::vector<double> zeros(data.size(), 0.0);
  const auto base = kernels::outcome_totals(records, zeros, opts, options.execution);

  const double n = static_cast<double>(totals.records);
  MetricsReport rep;
  rep.record_count = totals.records;
  rep.revenue = totals.revenue.value() / n;
  rep.match_rate = static_cast<double>(totals.matched) / n;
  rep.social_welfare = totals.social_welfare.value() / n;
  rep.buyer_welfare = totals.buyer_welfare.value() / n;
  rep.relative_revenue = ratio(totals.revenue.value(), base.revenue.value());
  rep.relative_match_rate =
      ratio(static_cast<double>(totals.matched), static_cast<double>(base.matched));
  rep.relative_social_welfare = ratio(totals.social_welfare.value(), base.social_welfare.value());
  rep.relative_buyer_welfare = ratio(totals.buyer_welfare.value(), base.buyer_welfare.value());
  rep.median_top_bid = opts.median_top_bid;
  rep.underprediction_below_median =
      totals.below_median == 0 ? 0.0
                               : static_cast<double>(totals.under_below_median) /
                                     static_cast<double>(totals.below_median);
  rep.underprediction_above_median =
      totals.above_median == 0 ? 0.0
                               : static_cast<double>(totals.under_above_median) /
                                     static_cast<double>(totals.above_median);
  if (options.per_context) rep.contexts = per_context(data, prices);
  return rep;
}

MetricsReport evaluate(const PricingModel& model, const Dataset& data,
                       const EvalOptions& options) {
  for (const auto& r : data.records) {
    if (r.features.dimension() != model.dimension())
      throw DimensionMismatch(model.dimension(), r.features.dimension());
  }
  std::vector<double> prices(data.size());
  kernels::predict(model, data.records, prices, options.execution);
  return evaluate_prices(data, prices, options);
}

SweepResult sweep(const Dataset& train_set, const Dataset& test_set,
                  std::span<const LossSpec> grid, const TrainConfig& base,
                  const EvalOptions& options) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  SweepResult result;
  for (const auto& loss : grid) {
    TrainConfig config = base;
    config.loss = loss;
    auto trained = train(train_set, config);
    result.rows.push_back({loss, evaluate(trained.model, test_set, options),
                           std::move(trained.curve)});
  }
  return result;
}

std::vector<CalibrationRow> calibration_curve(const SweepResult& result) {
  std::vector<CalibrationRow> out;
  for (const auto& row : result.rows) {
    if (row.loss.kind != LossKind::Clearing)
      throw WrongLossKind("calibration needs clearing-loss rows, got " +
                          std::string(to_string(row.loss.kind)));
    const double target = match_rate_lower_bound(row.loss.lambda);
    if (row.metrics.contexts.empty()) {
      out.push_back({row.loss.lambda, target, row.metrics.match_rate, "all",
                     row.metrics.match_rate});
    }
    for (const auto& c : row.metrics.contexts)
      out.push_back({row.loss.lambda, target, row.metrics.match_rate, c.context, c.match_rate});
  }
  return out;
}

namespace {

constexpr const char* kMetricColumns =
    "records,revenue,match_rate,social_welfare,buyer_welfare,relative_revenue,"
    "relative_match_rate,relative_social_welfare,relative_buyer_welfare,"
    "underprediction_below_median,underprediction_above_median";

void write_metric_fields(std::ostream& out, const MetricsReport& m) {
  out << m.record_count << ',' << format_double(m.revenue) << ',' << format_double(m.match_rate)
      << ',' << format_double(m.social_welfare) << ',' << format_double(m.buyer_welfare) << ','
      << format_double(m.relative_revenue) << ',' << format_double(m.relative_match_rate) << ','
      << format_double(m.relative_social_welfare) << ','
      << format_double(m.relative_buyer_welfare) << ','
      << format_double(m.underprediction_below_median) << ','
      << format_double(m.underprediction_above_median);
}

}  // namespace

void write_metrics_csv(std::ostream& out, const SweepResult& result) {
  out << "loss,lambda,gamma," << kMetricColumns << '\n';
  for (const auto& row : result.rows) {
    out << to_string(row.loss.kind) << ',' << format_double(row.loss.lambda) << ','
        << (row.loss.gamma ? format_double(*row.loss.gamma) : std::string()) << ',';
    write_metric_fields(out, row.metrics);
    out << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  out << kMetricColumns << '\n';
  write_metric_fields(out, report);
  out << '\n';
}

void write_metrics_table(std::ostream& out, const MetricsReport& m) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "records                      " << m.record_count << '\n'
     << "revenue                      " << m.revenue << '\n'
     << "match rate                   " << m.match_rate << '\n'
     << "social welfare               " << m.social_welfare << '\n'
     << "buyer welfare                " << m.buyer_welfare << '\n'
     << "relative revenue             " << m.relative_revenue << '\n'
     << "relative match rate          " << m.relative_match_rate << '\n'
     << "relative social welfare      " << m.relative_social_welfare << '\n'
     << "relative buyer welfare       " << m.relative_buyer_welfare << '\n'
     << "underprediction below median " << m.underprediction_below_median << '\n'
     << "underprediction above median " << m.underprediction_above_median << '\n';
  for (const auto& c : m.contexts)
    os << "  context " << c.context << ": " << c.records << " records, match rate "
       << c.match_rate << '\n';
  out << os.str();
}

void write_metrics_table(std::ostream& out, const SweepResult& result) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "loss" << std::right << std::setw(8) << "lambda"
     << std::setw(7) << "gamma" << std::setw(10) << "revenue" << std::setw(8) << "MR"
     << std::setw(10) << "SW" << std::setw(10) << "BW" << std::setw(9) << "rel.rev"
     << std::setw(8) << "rel.MR" << std::setw(8) << "rel.SW" << std::setw(8) << "rel.BW"
     << std::setw(9) << "under<md" << std::setw(9) << "under>md" << '\n';
  os << std::fixed;
  for (const auto& row : result.rows) {
    const auto& m = row.metrics;
    os << std::left << std::setw(10) << to_string(row.loss.kind) << std::right
       << std::setprecision(3) << std::setw(8) << row.loss.lambda << std::setw(7);
    if (row.loss.gamma) {
      os << *row.loss.gamma;
    } else {
      os << "-";
    }
    os << std::setprecision(4) << std::setw(10) << m.revenue << std::setw(8) << m.match_rate
       << std::setw(10) << m.social_welfare << std::setw(10) << m.buyer_welfare
       << std::setprecision(3) << std::setw(9) << m.relative_revenue << std::setw(8)
       << m.relative_match_rate << std::setw(8) << m.relative_social_welfare << std::setw(8)
       << m.relative_buyer_welfare << std::setw(9) << m.underprediction_below_median
       << std::setw(9) << m.underprediction_above_median << '\n';
  }
  out << os.str();
}

void write_calibration_csv(std::ostream& out, std::span<const CalibrationRow> rows) {
  out << "lambda,target_mr,realized_mr,context,context_mr\n";
  for (const auto& r : rows) {
    out << format_double(r.lambda) << ',' << format_double(r.target_match_rate) << ','
        << format_double(r.realized_match_rate) << ',' << r.context << ','
        << format_double(r.context_match_rate) << '\n';
  }
}

}  // namespace clearing
