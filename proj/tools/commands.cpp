#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "asyncts/checkpoint.hpp"
#include "asyncts/error.hpp"

namespace asyncts::cli {
namespace {

namespace fs = std::filesystem;

// Files are staged under temporary names and renamed together on commit, so
// a failed command leaves no partial outputs behind.
class StagedOutputs {
 public:
  explicit StagedOutputs(fs::path dir) : dir_(std::move(dir)) {}
  StagedOutputs(const StagedOutputs&) = delete;
  StagedOutputs& operator=(const StagedOutputs&) = delete;
  ~StagedOutputs() {
    std::error_code ec;
    for (const auto& [tmp, final] : staged_) fs::remove(tmp, ec);
  }

  void stage(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path tmp = dir_ / ("." + name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    staged_.emplace_back(tmp, dir_ / name);
  }

  void commit() {
    for (const auto& [tmp, final] : staged_) fs::rename(tmp, final);
    staged_.clear();
  }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::ostream& out_of(const CommandContext& ctx) {
  static std::ostream null_stream(nullptr);
  return ctx.out ? *ctx.out : null_stream;
}

std::string summary_line(const LabelSummary& s) {
  return "beta0=" + exact(s.proportions.beta0) + ",beta1=" + exact(s.proportions.beta1) +
         ",eps1=" + exact(s.thresholds.epsilon1) + ",eps2=" + exact(s.thresholds.epsilon2);
}

std::string plan_csv(const RoundPlan& plan) {
  std::ostringstream os;
  os << "round,s_i,per_client,eta_i,cum_start\n";
  for (const auto& r : plan.rounds) {
    os << r.index << ',' << r.iterations << ',' << r.per_client << ',' << exact(r.eta) << ',' << r.cum_start << '\n';
  }
  return os.str();
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ComparisonError*>(&e)) return config_error;
  if (dynamic_cast<const DataError*>(&e)) return data_error;
  return runtime_error;
}

PreparedData prepare_data(const RunConfig& cfg) {
  cfg.validate();
  PreparedData d;
  d.series = load_csv(cfg.data_path, cfg.data_symbol);
  d.split = split_by_date(d.series, {cfg.train_start, cfg.train_end}, {cfg.test_start, cfg.test_end}, cfg.window);
  return d;
}

std::optional<EvlContext> evl_context(const RunConfig& cfg, const DatasetSplit& split) {
  if (!cfg.evl_enabled) return std::nullopt;
  const auto targets = targets_of(split.train);
  const auto th = choose_thresholds(targets, cfg.evl_quantile);
  std::vector<IndicatorLabel> labels;
  labels.reserve(targets.size());
  for (double t : targets) labels.push_back(indicator(t, th));
  const auto props = estimate_betas(labels);
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  const double sd = std::sqrt(var / static_cast<double>(targets.size()));
  return EvlContext{th.epsilon1, sd > 0.0 ? sd : 1.0, props.evl_params(cfg.evl_gamma, cfg.evl_swap_betas)};
}

ExperimentConfig experiment_config(const RunConfig& cfg, const DatasetSplit& split) {
  ExperimentConfig e;
  e.network.input_dim = 1;
  e.network.lstm_layers = 2;
  e.network.hidden_dim = cfg.hidden;
  e.network.fc_dims = cfg.fc_dims;
  e.network.clip_norm = cfg.clip;
  e.network.lambda = cfg.lambda.value_or(1.0 / static_cast<double>(split.train.size()));
  e.network.evl_weight = cfg.evl_enabled ? cfg.evl_weight : 0.0;
  e.sample = {cfg.schedule_a, cfg.schedule_p, cfg.schedule_b};
  e.step = {cfg.eta0, cfg.beta};
  e.budget = cfg.budget;
  e.clients = cfg.nodes;
  e.mode = cfg.exchange;
  e.delay = cfg.delay;
  e.share_data = cfg.share_data;
  e.seed = cfg.seed;
  e.executor = cfg.executor;
  e.jitter_us = cfg.jitter_us;
  e.evl = evl_context(cfg, split);
  e.echo = serialize_config(cfg);
  return e;
}

ExperimentReport cmd_train(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = prepare_data(cfg);
  const auto ecfg = experiment_config(cfg, data.split);
  auto report = run_experiment(ecfg, data.split.train, data.split.test);
  auto& out = out_of(ctx);
  if (!report.audit.ok) {
    std::ostringstream msg;
    msg << "delay audit failed: " << report.audit.reason;
    if (report.audit.violation) {
      const auto& v = *report.audit.violation;
      msg << " [version=" << v.version << " client=" << v.client_id << " base=" << v.base_version
          << " round=" << v.round_index << " t=" << v.applied_iterations_before << "]";
    }
    throw ContractError(msg.str());
  }
  if (ctx.baseline) {
    std::ifstream in(*ctx.baseline);
    if (!in) throw ConfigError("cannot read baseline report '" + ctx.baseline->string() + "'");
    const auto base = parse_report(in);
    speedup(summarize(report), base);  // rejects incomparable runs
    report.baseline_wall_ms = base.total_wall_ms;
  }

  std::ostringstream rounds_csv, predictions_csv, report_txt, ckpt;
  write_rounds_csv(rounds_csv, report.rounds);
  const auto pred = predict_all(report.final_state.params, ecfg.network, data.split.test);
  std::vector<PredictionRow> rows;
  rows.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& w = data.split.test[i];
    rows.push_back({i, data.series.dates[w.target_index()].to_string(), denormalize(w.target, w.base_price),
                    denormalize(pred[i], w.base_price)});
  }
  write_predictions_csv(predictions_csv, rows);
  write_report(report_txt, report);
  write_checkpoint(ckpt, report.final_state.params, ecfg.network);

  if (ctx.out_dir) {
    StagedOutputs files(*ctx.out_dir);
    files.stage("rounds.csv", rounds_csv.str());
    files.stage("predictions.csv", predictions_csv.str());
    files.stage("report.txt", report_txt.str());
    files.stage("model.ckpt", ckpt.str());
    files.commit();
  }
  out << "rounds=" << report.totals.rounds << " accepted_iterations=" << report.totals.accepted_iterations
      << " K=" << report.totals.budget << " final_test_rmse=" << exact(report.totals.final_test_rmse)
      << " wall_ms=" << exact(report.totals.wall_ms) << '\n';
  return report;
}

RoundPlan cmd_plan(const RunConfig& cfg, const CommandContext& ctx) {
  cfg.validate();
  const auto plan = build_round_plan(cfg.budget, {cfg.schedule_a, cfg.schedule_p, cfg.schedule_b},
                                     {cfg.eta0, cfg.beta}, cfg.nodes);
  const auto csv = plan_csv(plan);
  if (ctx.out_dir) {
    StagedOutputs files(*ctx.out_dir);
    files.stage("plan.csv", csv);
    files.commit();
  }
  out_of(ctx) << csv;
  return plan;
}

LabelSummary cmd_label_events(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = prepare_data(cfg);
  const auto train_targets = targets_of(data.split.train);
  LabelSummary s;
  s.thresholds = choose_thresholds(train_targets, cfg.evl_quantile);
  std::vector<IndicatorLabel> train_labels;
  for (double t : train_targets) train_labels.push_back(indicator(t, s.thresholds));
  s.proportions = estimate_betas(train_labels);
  s.labels = train_labels;
  for (const auto& w : data.split.test) s.labels.push_back(indicator(w.target, s.thresholds));

  std::ostringstream csv;
  csv << "index,target,label\n";
  std::size_t i = 0;
  for (const auto* part : {&data.split.train, &data.split.test}) {
    for (const auto& w : *part) {
      csv << i << ',' << exact(w.target) << ',' << static_cast<int>(s.labels[i]) << '\n';
      ++i;
    }
  }
  const auto line = summary_line(s);
  if (ctx.out_dir) {
    StagedOutputs files(*ctx.out_dir);
    files.stage("labels.csv", csv.str());
    files.stage("labels_summary.txt", line + "\n");
    files.commit();
  }
  out_of(ctx) << line << '\n';
  return s;
}

ExchangeComparison cmd_compare_exchange(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = prepare_data(cfg);
  auto ecfg = experiment_config(cfg, data.split);
  ecfg.executor = Executor::deterministic;
  ecfg.evaluate_rounds = false;

  ExchangeComparison cmp;
  ecfg.mode = ExchangeMode::model;
  const auto model = run_experiment(ecfg, data.split.train, data.split.test);
  ecfg.mode = ExchangeMode::gradient;
  const auto gradient = run_experiment(ecfg, data.split.train, data.split.test);
  for (const auto* r : {&model, &gradient}) {
    if (!r->audit.ok) throw ContractError("delay audit failed: " + r->audit.reason);
  }
  cmp.model_rmse = model.totals.final_test_rmse;
  cmp.gradient_rmse = gradient.totals.final_test_rmse;
  cmp.model_bytes = model.totals.bytes_up + model.totals.bytes_down;
  cmp.gradient_bytes = gradient.totals.bytes_up + gradient.totals.bytes_down;

  std::ostringstream os;
  os << "# exchange-mode comparison (same seed and budget)\n";
  os << "clients = " << cfg.nodes << '\n';
  os << "budget_K = " << cfg.budget << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "delay = " << cfg.delay.to_string() << '\n';
  os << "model.final_test_rmse = " << exact(cmp.model_rmse) << '\n';
  os << "model.bytes_up = " << model.totals.bytes_up << '\n';
  os << "model.bytes_down = " << model.totals.bytes_down << '\n';
  os << "gradient.final_test_rmse = " << exact(cmp.gradient_rmse) << '\n';
  os << "gradient.bytes_up = " << gradient.totals.bytes_up << '\n';
  os << "gradient.bytes_down = " << gradient.totals.bytes_down << '\n';
  cmp.text = os.str();
  if (ctx.out_dir) {
    StagedOutputs files(*ctx.out_dir);
    files.stage("compare.txt", cmp.text);
    files.commit();
  }
  out_of(ctx) << cmp.text;
  return cmp;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asynchronous local-SGD LSTM trainer with extreme-event tooling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string baseline;
  const auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config_path, "key = value configuration file (missing keys take defaults)");
    auto* o = sub->add_option("--out", out_dir, "output directory");
    if (out_required) o->required();
  };
  auto* train = app.add_subcommand("train", "run the distributed training experiment");
  add_common(train, true);
  train->add_option("--baseline", baseline, "report.txt of a single-node run to compute speedup against");
  auto* plan = app.add_subcommand("plan", "print the communication-round plan as CSV");
  add_common(plan, false);
  auto* label = app.add_subcommand("label-events", "label targets as normal / right / left extremes");
  add_common(label, true);
  auto* compare = app.add_subcommand("compare-exchange-modes", "run model and gradient exchange side by side");
  add_common(compare, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return ok;
    }
    err << "error: " << e.what() << '\n';
    return config_error;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    CommandContext ctx;
    ctx.out = &out;
    if (!out_dir.empty()) ctx.out_dir = out_dir;
    if (!baseline.empty()) ctx.baseline = baseline;

    if (train->parsed()) cmd_train(cfg, ctx);
    else if (plan->parsed()) cmd_plan(cfg, ctx);
    else if (label->parsed()) cmd_label_events(cfg, ctx);
    else if (compare->parsed()) cmd_compare_exchange(cfg, ctx);
    return ok;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace asyncts::cli
