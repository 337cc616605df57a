#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "clearing/cli.hpp"
#include "clearing/eval.hpp"
#include "clearing/model.hpp"
#include "clearing/text.hpp"
#include "clearing/theory.hpp"

namespace clearing::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct GenerateArgs {
  std::string config;
  std::string out;
  std::optional<std::size_t> records;
  std::optional<std::uint64_t> seed;
  std::optional<bool> filter;
};

struct TrainArgs {
  std::string data;
  std::string loss;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::size_t iters = 10000;
  std::size_t batch = 512;
  double lr = 0.001;
  std::uint64_t seed = 0;
  std::string model;
  std::string curve;
  std::size_t curve_every = 100;
};

struct SweepArgs {
  std::string train;
  std::string test;
  std::string loss;
  std::string lambdas;
  std::string gammas;
  std::size_t iters = 10000;
  std::size_t batch = 512;
  double lr = 0.001;
  std::uint64_t seed = 0;
  std::string out;
  std::string calibrate;
  bool strict_revenue = false;
};

struct OracleArgs {
  std::string dist = "uniform:0,1";
  std::string cost = "const:0";
  int n = 5;
  double lambda = 1.0;
  std::optional<double> target_mr;
};

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string report;
  bool strict_revenue = false;
};

LossKind trainable_kind(const std::string& name) {
  const auto kind = parse_loss_kind(name);
  if (!kind) throw UsageError("unknown loss '" + name + "' (clearing|sq-b1|sq-b2|surrogate)");
  if (*kind == LossKind::Revenue)
    throw UsageError("the revenue loss is evaluation-only and cannot be trained");
  return *kind;
}

std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    double v = 0.0;
    if (!parse_double(token, v)) throw UsageError(std::string("bad value '") + token + "' in " + name);
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(name) + " grid is empty");
  return out;
}

template <typename Stream>
Stream open_output(const std::string& path) {
  Stream s(path, std::ios::binary);
  if (!s) throw Error("cannot write " + path);
  return s;
}

void redimension(Dataset& data, std::size_t dimension) {
  if (data.dimension == dimension) return;
  for (auto& r : data.records) r.features = r.features.with_dimension(dimension);
  data.dimension = dimension;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GenConfig cfg = load_gen_config(a.config);
  if (a.records) cfg.num_records = *a.records;
  if (a.seed) cfg.seed = *a.seed;
  if (a.filter) cfg.filter_top_bid_above_cost = *a.filter;
  const auto gen = generate(cfg);
  write_dataset(a.out, gen.data);
  out << "records " << gen.data.size() << "\ndropped " << gen.dropped << '\n';
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg;
  cfg.loss.kind = trainable_kind(a.loss);
  if (cfg.loss.kind == LossKind::SurrogateRevenue && !a.gamma)
    throw UsageError("--loss surrogate requires --gamma");
  if (cfg.loss.kind != LossKind::SurrogateRevenue && a.gamma)
    throw UsageError("--gamma only applies to --loss surrogate");
  cfg.loss.lambda = a.lambda.value_or(cfg.loss.kind == LossKind::Clearing ? 1.0 : 0.0);
  cfg.loss.gamma = a.gamma;
  try {
    cfg.loss.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  cfg.iterations = a.iters;
  cfg.minibatch_size = a.batch;
  cfg.optimizer.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.curve_every = a.curve_every;

  const Dataset data = read_dataset(a.data);
  const auto result = train(data, cfg);
  save_checkpoint(a.model, result.model);
  if (!a.curve.empty()) {
    auto f = open_output<std::ofstream>(a.curve);
    write_loss_curve(f, result.curve);
  }
  out << "trained " << to_string(cfg.loss.kind) << " on " << data.size() << " records, final loss "
      << (result.curve.empty() ? 0.0 : result.curve.back().mean_loss) << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const LossKind kind = trainable_kind(a.loss);
  const auto lambdas = parse_grid(a.lambdas, "--lambdas");
  std::vector<double> gammas;
  if (kind == LossKind::SurrogateRevenue) {
    if (a.gammas.empty()) throw UsageError("--loss surrogate requires --gammas");
    gammas = parse_grid(a.gammas, "--gammas");
  } else if (!a.gammas.empty()) {
    throw UsageError("--gammas only applies to --loss surrogate");
  }
  if (!a.calibrate.empty() && kind != LossKind::Clearing)
    throw UsageError("--calibrate needs --loss clearing");

  std::vector<LossSpec> grid;
  for (double l : lambdas) {
    if (gammas.empty()) {
      grid.push_back({kind, l, std::nullopt});
    } else {
      for (double g : gammas) grid.push_back({kind, l, g});
    }
  }
  for (const auto& spec : grid) {
    try {
      spec.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }

  Dataset train_set = read_dataset(a.train);
  Dataset test_set = read_dataset(a.test);
  const std::size_t dim = std::max(train_set.dimension, test_set.dimension);
  redimension(train_set, dim);
  redimension(test_set, dim);

  TrainConfig base;
  base.iterations = a.iters;
  base.minibatch_size = a.batch;
  base.optimizer.learning_rate = a.lr;
  base.seed = a.seed;
  EvalOptions eval_opts;
  eval_opts.strict_exchange_revenue = a.strict_revenue;
  const auto result = sweep(train_set, test_set, grid, base, eval_opts);
  {
    auto f = open_output<std::ofstream>(a.out);
    write_metrics_csv(f, result);
  }
  if (!a.calibrate.empty()) {
    auto f = open_output<std::ofstream>(a.calibrate);
    write_calibration_csv(f, calibration_curve(result));
  }
  write_metrics_table(out, result);
  return kExitOk;
}

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  Distribution bids;
  Distribution cost;
  try {
    bids = Distribution::parse(a.dist);
    cost = Distribution::parse(a.cost);
  } catch (const InvalidDistributionParams& e) {
    throw UsageError(e.what());
  }
  if (a.n < 1) throw UsageError("--n must be >= 1");
  if (a.lambda < 0.0) throw UsageError("--lambda must be >= 0");

  std::ostringstream os;
  os << std::setprecision(5);
  std::vector<DistributionTerm> buyers(static_cast<std::size_t>(a.n), DistributionTerm{1.0, bids});
  const std::vector<DistributionTerm> sellers{{a.lambda, cost}};
  try {
    const double price = balance_price(buyers, sellers);
    os << "balance_price " << price << '\n';
  } catch (const NoRoot&) {
    os << "balance_price n/a (no root)\n";
  }
  if (a.lambda <= a.n) {
    os << "quantile_price " << quantile_price(bids, a.n, a.lambda) << '\n';
    os << "exact_iid_match_rate " << exact_iid_match_rate(a.n, a.lambda) << '\n';
  } else {
    os << "quantile_price n/a (lambda > n)\nexact_iid_match_rate n/a (lambda > n)\n";
  }
  os << "match_rate_bound " << match_rate_lower_bound(a.lambda) << '\n';
  os << "welfare_bound " << welfare_lower_bound(a.lambda) << '\n';
  if (a.target_mr) {
    try {
      os << "lambda_for_target_mr " << lambda_for_target_match_rate(*a.target_mr) << '\n';
    } catch (const OutOfRange& e) {
      throw UsageError(e.what());
    }
  }
  out << os.str();
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const PricingModel model = load_checkpoint(a.model);
  Dataset data = read_dataset(a.data);
  if (data.dimension > model.dimension())
    throw Error("dimension mismatch: model " + a.model + " has dimension " +
                std::to_string(model.dimension()) + ", dataset " + a.data + " has dimension " +
                std::to_string(data.dimension));
  redimension(data, model.dimension());
  EvalOptions opts;
  opts.strict_exchange_revenue = a.strict_revenue;
  const auto report = evaluate(model, data, opts);
  if (!a.report.empty()) {
    auto f = open_output<std::ofstream>(a.report);
    write_metrics_csv(f, report);
  }
  write_metrics_table(out, report);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn market-clearing reserve prices for second-price auctions", "clearing"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic auction dataset");
  generate_cmd->add_option("--config", gen.config, "YAML generation config")->required();
  generate_cmd->add_option("--out", gen.out, "Output dataset (JSON lines)")->required();
  generate_cmd->add_option("--records", gen.records, "Override the record count");
  generate_cmd->add_option("--seed", gen.seed, "Override the seed");
  generate_cmd->add_flag("--filter,!--no-filter", gen.filter, "Drop records with top bid below cost");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit a linear pricing model");
  train_cmd->add_option("--data", tr.data, "Training dataset")->required();
  train_cmd->add_option("--loss", tr.loss, "clearing|sq-b1|sq-b2|surrogate")->required();
  train_cmd->add_option("--lambda", tr.lambda, "Seller quantity / match-rate regularizer");
  train_cmd->add_option("--gamma", tr.gamma, "Surrogate slope parameter");
  train_cmd->add_option("--iters", tr.iters, "Minibatch iterations")->capture_default_str();
  train_cmd->add_option("--batch", tr.batch, "Minibatch size")->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Shuffle seed")->capture_default_str();
  train_cmd->add_option("--model", tr.model, "Checkpoint output path")->required();
  train_cmd->add_option("--curve", tr.curve, "Loss curve CSV output path");
  train_cmd->add_option("--curve-every", tr.curve_every, "Iterations per curve point")
      ->capture_default_str();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate over a lambda/gamma grid");
  sweep_cmd->add_option("--train", sw.train, "Training dataset")->required();
  sweep_cmd->add_option("--test", sw.test, "Test dataset")->required();
  sweep_cmd->add_option("--loss", sw.loss, "clearing|sq-b1|sq-b2|surrogate")->required();
  sweep_cmd->add_option("--lambdas", sw.lambdas, "Comma-separated lambda grid")->required();
  sweep_cmd->add_option("--gammas", sw.gammas, "Comma-separated gamma grid (surrogate)");
  sweep_cmd->add_option("--iters", sw.iters, "Minibatch iterations")->capture_default_str();
  sweep_cmd->add_option("--batch", sw.batch, "Minibatch size")->capture_default_str();
  sweep_cmd->add_option("--lr", sw.lr, "Adam learning rate")->capture_default_str();
  sweep_cmd->add_option("--seed", sw.seed, "Shuffle seed")->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "Metrics CSV output path")->required();
  sweep_cmd->add_option("--calibrate", sw.calibrate, "Calibration CSV output path (clearing)");
  sweep_cmd->add_flag("--strict-revenue", sw.strict_revenue, "Unsold auctions earn 0");

  OracleArgs orc;
  auto* oracle_cmd = app.add_subcommand("oracle", "Closed-form clearing-price quantities");
  oracle_cmd->add_option("--dist", orc.dist, "Bid distribution")->capture_default_str();
  oracle_cmd->add_option("--cost", orc.cost, "Seller cost distribution")->capture_default_str();
  oracle_cmd->add_option("--n", orc.n, "Bidders per auction")->capture_default_str();
  oracle_cmd->add_option("--lambda", orc.lambda, "Seller quantity")->capture_default_str();
  oracle_cmd->add_option("--target-mr", orc.target_mr, "Print lambda for this match rate");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Replay auctions with a model's reserves");
  evaluate_cmd->add_option("--model", ev.model, "Checkpoint path")->required();
  evaluate_cmd->add_option("--data", ev.data, "Dataset path")->required();
  evaluate_cmd->add_option("--report", ev.report, "Metrics CSV output path");
  evaluate_cmd->add_flag("--strict-revenue", ev.strict_revenue, "Unsold auctions earn 0");

  std::vector<const char*> argv{"clearing"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*sweep_cmd) return cmd_sweep(sw, out);
    if (*oracle_cmd) return cmd_oracle(orc, out);
    if (*evaluate_cmd) return cmd_evaluate(ev, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace clearing::cli
