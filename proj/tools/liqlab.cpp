// liqlab: tick tape -> minute liquidity features -> direction classifiers -> reports.
//
//   liqlab generate --out tape.csv --seed 7 --days 20 --signal-strength 0.8
//   liqlab features --input tape.csv --out run --timezone America/New_York
//   liqlab train    --input run/features.csv --out run
//   liqlab evaluate --input run --out run
//   liqlab select   --input run --out run --select forward
//
// Every flag can also be set through LIQLAB_<FLAG> (e.g. LIQLAB_SEED=3).

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "liqlab/liqlab.hpp"

namespace fs = std::filesystem;
using namespace liqlab;

namespace {

std::string env_name(const std::string& flag) {
  std::string out = "LIQLAB_";
  for (char c : flag.substr(flag.find_first_not_of('-')))
    out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option(name, target, help)->envname(env_name(name))->capture_default_str();
}

struct Flags {
  RunConfig run;
  std::string session_start = "11:00:00";
  std::string session_end = "16:00:00";
  std::string split = "70,15,15";
  std::string split_mode = "chrono";
  std::string model = "all";
  std::string features = "all";
  bool dump_buckets = false;
};

void add_session_flags(CLI::App* app, Flags& f) {
  flag(app, "--session-start", f.session_start, "session start, local HH:MM[:SS]");
  flag(app, "--session-end", f.session_end, "session end (exclusive), local HH:MM[:SS]");
}

void add_model_flags(CLI::App* app, Flags& f) {
  auto& m = f.run.model;
  flag(app, "--model", f.model, "lr|svm|rf|all");
  flag(app, "--seed", f.run.seed, "master seed; per-stage seeds derive from it");
  flag(app, "--lr-rate", m.logistic.learning_rate, "logistic learning rate");
  flag(app, "--lr-epochs", m.logistic.epochs, "logistic gradient steps");
  flag(app, "--lr-l2", m.logistic.l2, "logistic L2 strength");
  flag(app, "--svm-lambda", m.svm.lambda, "SVM regularization");
  flag(app, "--svm-epochs", m.svm.epochs, "SVM passes over the data");
  flag(app, "--rf-trees", m.forest.n_trees, "forest size");
  flag(app, "--rf-depth", m.forest.max_depth, "max tree depth (0 = unlimited)");
  flag(app, "--rf-min-leaf", m.forest.min_samples_leaf, "min rows per leaf");
}

void add_jobs(CLI::App* app, Flags& f) {
  flag(app, "--jobs", f.run.jobs, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
}

// Turns the string-valued flags into RunConfig fields.
void finish(Flags& f, bool need_timezone) {
  auto& run = f.run;
  run.session_start = f.session_start;
  run.session_end = f.session_end;
  std::vector<std::string_view> parts;
  csv::split(f.split, parts);
  std::int64_t pct[3];
  if (parts.size() != 3 || !csv::parse_int(parts[0], pct[0]) ||
      !csv::parse_int(parts[1], pct[1]) || !csv::parse_int(parts[2], pct[2]))
    throw Error(ErrorKind::Config, "--split wants three integers, e.g. 70,15,15");
  run.split.train = static_cast<int>(pct[0]);
  run.split.validation = static_cast<int>(pct[1]);
  run.split.test = static_cast<int>(pct[2]);
  if (f.split_mode == "chrono")
    run.split.mode = SplitMode::Chronological;
  else if (f.split_mode == "shuffled")
    run.split.mode = SplitMode::Shuffled;
  else
    throw Error(ErrorKind::Config, "--split-mode must be chrono or shuffled");
  if (f.model == "all")
    run.models.assign(kAllModelKinds.begin(), kAllModelKinds.end());
  else
    run.models = {model_kind_from_cli(f.model)};
  run.features = parse_metric_list(f.features);
  run.derive_seeds();
  run.validate(need_timezone);
}

int cmd_generate(SynthConfig& synth, const std::string& out, const std::string& start_date,
                 const std::string& session_start, const std::string& session_end,
                 const std::string& proxy, const std::string& tickers, unsigned jobs) {
  synth.start_day = parse_date(start_date);
  synth.session = SessionWindow::parse(session_start, session_end);
  synth.signal_proxy = signal_proxy_from_string(proxy);
  synth.tickers.clear();
  std::vector<std::string_view> parts;
  csv::split(tickers, parts);
  for (auto t : parts) synth.tickers.emplace_back(t);
  synth.validate();
  const auto tape = generate(synth, jobs);
  csv::write_file_atomic(out, serialize_tape(tape));
  const auto meta = synth.to_json();
  nlohmann::json j{{"synth_config", meta},
                   {"run_config_hash", [&] {
                      char buf[17];
                      std::snprintf(buf, sizeof buf, "%016llx",
                                    static_cast<unsigned long long>(fnv1a64(meta.dump())));
                      return std::string(buf);
                    }()},
                   {"records", tape.size()},
                   {"planted_features", planted_features(synth.signal_proxy)}};
  csv::write_file_atomic(out + ".meta.json", j.dump(2) + "\n");
  std::cout << "wrote " << tape.size() << " records to " << out << "\n";
  return 0;
}

int cmd_features(Flags& f) {
  finish(f, true);
  const fs::path dir = f.run.out;
  auto parsed = parse_tape(csv::read_file(f.run.input));
  const auto table = build_features(std::move(parsed.records), f.run, parsed.report);
  const std::string hash = f.run.hash();
  csv::write_file_atomic(dir / "features.csv", serialize_features(table.rows, hash));
  if (f.dump_buckets)
    csv::write_file_atomic(dir / "buckets.csv", serialize_buckets(table.buckets, hash));
  csv::write_file_atomic(
      dir / "ingest_report.json",
      to_json(table.ingest, table.session_records, table.rows.size(), hash).dump(2) + "\n");
  std::cout << "ingest: " << table.ingest.accepted << " accepted, "
            << table.ingest.rejected_malformed << " malformed, " << table.ingest.rejected_crossed
            << " crossed; " << table.rows.size() << " feature rows -> " << (dir / "features.csv")
            << "\n";
  return 0;
}

int cmd_train(Flags& f) {
  finish(f, false);
  const auto rows = parse_features(csv::read_file(f.run.input));
  const auto trained = train_stage(rows, f.run);
  write_train_outputs(trained, f.run, f.run.out);
  const auto& ds = trained.dataset;
  std::cout << "dataset: " << ds.train_end << " train / " << ds.val_end - ds.train_end
            << " val / " << ds.rows.size() - ds.val_end << " test rows; trained "
            << trained.models.size() << " model(s) -> " << f.run.out << "\n";
  return 0;
}

void print_table(const EvaluationReport& report) { std::cout << results_table_csv(report); }

int cmd_evaluate(Flags& f) {
  finish(f, false);
  const auto loaded = load_training(f.run.input, f.run.models);
  const auto report = evaluate_stage(loaded, f.run);
  render_report(report, f.run.out);
  print_table(report);
  return 0;
}

int cmd_select(Flags& f) {
  finish(f, false);
  const auto loaded = load_training(f.run.input, f.run.models);
  const auto report = select_stage(loaded, f.run);
  render_report(report, f.run.out,
                {"subset_report.json", "subset_results.csv", "_subset", true});
  print_table(report);
  return 0;
}

int cmd_plant_check(SynthConfig& synth, const std::string& input, const std::string& proxy,
                    const std::string& session_start, const std::string& session_end,
                    std::size_t min_pairs) {
  synth.signal_proxy = signal_proxy_from_string(proxy);
  synth.session = SessionWindow::parse(session_start, session_end);
  const auto parsed = parse_tape(csv::read_file(input));
  const auto check = plant_check(synth, parsed.records, min_pairs);
  std::cout << "pairs " << check.pairs << ", P(direction == proxy) = " << check.probability
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liqlab: minute liquidity features and direction classifiers from tick tapes"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML key = value file with flag values");

  // generate
  SynthConfig synth;
  std::string gen_out, start_date = "2024-08-05", gen_start = "11:00:00", gen_end = "16:00:00",
                       proxy = "quote_imbalance", tickers = "SYNA";
  unsigned gen_jobs = 1;
  auto* gen = app.add_subcommand("generate", "write a synthetic tick tape");
  flag(gen, "--out", gen_out, "tape CSV path")->required();
  flag(gen, "--seed", synth.seed, "generator seed");
  flag(gen, "--tickers", tickers, "comma-separated symbols");
  flag(gen, "--days", synth.days, "trading days");
  flag(gen, "--start-date", start_date, "first day, YYYY-MM-DD");
  flag(gen, "--timezone", synth.timezone, "exchange timezone");
  flag(gen, "--session-start", gen_start, "session start, local time");
  flag(gen, "--session-end", gen_end, "session end, local time");
  flag(gen, "--trade-rate", synth.trade_rate, "trades per minute");
  flag(gen, "--quote-rate", synth.quote_rate, "quotes per minute");
  flag(gen, "--start-price", synth.start_price, "opening price");
  flag(gen, "--volatility", synth.volatility, "per-minute log step sd");
  flag(gen, "--half-spread-mean", synth.half_spread_mean, "half spread, ticks");
  flag(gen, "--half-spread-jitter", synth.half_spread_jitter, "half spread jitter, ticks");
  flag(gen, "--size-mu", synth.size_mu, "ln quote size mean");
  flag(gen, "--size-sigma", synth.size_sigma, "ln quote size sd");
  flag(gen, "--signal-strength", synth.signal_strength, "0 = random walk, 1 = fully planted");
  flag(gen, "--signal-proxy", proxy, "quote_imbalance|spread");
  flag(gen, "--imbalance-factor", synth.imbalance_factor, "size ratio in the imbalanced regime");
  flag(gen, "--spread-factor", synth.spread_factor, "half-spread multiplier in the wide regime");
  flag(gen, "--jobs", gen_jobs, "worker threads")->check(CLI::Range(1u, 1024u));

  // features
  Flags feat;
  auto* features = app.add_subcommand("features", "tape -> per-minute liquidity features");
  flag(features, "--input", feat.run.input, "tape CSV")->required()->check(CLI::ExistingFile);
  flag(features, "--out", feat.run.out, "output directory")->required();
  flag(features, "--timezone", feat.run.timezone, "exchange timezone (IANA name or +HH:MM)")
      ->required();
  add_session_flags(features, feat);
  features->add_flag("--dump-buckets", feat.dump_buckets, "also write buckets.csv");
  add_jobs(features, feat);

  // train
  Flags tr;
  auto* train = app.add_subcommand("train", "features -> labeled split + models");
  flag(train, "--input", tr.run.input, "features.csv")->required()->check(CLI::ExistingFile);
  flag(train, "--out", tr.run.out, "output directory")->required();
  flag(train, "--split", tr.split, "train,val,test percentages");
  flag(train, "--split-mode", tr.split_mode, "chrono|shuffled");
  flag(train, "--features", tr.features, "comma-separated metric names or 'all'");
  add_model_flags(train, tr);
  add_jobs(train, tr);

  // evaluate
  Flags ev;
  auto* evaluate = app.add_subcommand("evaluate", "test-set confusion matrices and importances");
  flag(evaluate, "--input", ev.run.input, "train output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  flag(evaluate, "--out", ev.run.out, "output directory")->required();
  add_model_flags(evaluate, ev);
  add_jobs(evaluate, ev);

  // select
  Flags se;
  auto* select = app.add_subcommand("select", "feature-subset search, then one test evaluation");
  flag(select, "--input", se.run.input, "train output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  flag(select, "--out", se.run.out, "output directory")->required();
  flag(select, "--select", se.run.selection, "forward|topk:<k>|exhaustive:<k>");
  add_model_flags(select, se);
  add_jobs(select, se);

  // plant-check
  SynthConfig pc;
  std::string pc_input, pc_proxy = "quote_imbalance", pc_start = "11:00:00", pc_end = "16:00:00";
  std::size_t pc_min = 10'000;
  auto* plant = app.add_subcommand("plant-check", "measure the planted signal in a tape");
  flag(plant, "--input", pc_input, "tape CSV")->required()->check(CLI::ExistingFile);
  flag(plant, "--timezone", pc.timezone, "exchange timezone");
  flag(plant, "--signal-proxy", pc_proxy, "quote_imbalance|spread");
  flag(plant, "--imbalance-factor", pc.imbalance_factor, "as used by generate");
  flag(plant, "--spread-factor", pc.spread_factor, "as used by generate");
  flag(plant, "--half-spread-mean", pc.half_spread_mean, "as used by generate");
  flag(plant, "--half-spread-jitter", pc.half_spread_jitter, "as used by generate");
  flag(plant, "--session-start", pc_start, "session start");
  flag(plant, "--session-end", pc_end, "session end");
  flag(plant, "--min-pairs", pc_min, "minimum minute pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen)
      return cmd_generate(synth, gen_out, start_date, gen_start, gen_end, proxy, tickers,
                          gen_jobs);
    if (*features) return cmd_features(feat);
    if (*train) return cmd_train(tr);
    if (*evaluate) return cmd_evaluate(ev);
    if (*select) return cmd_select(se);
    if (*plant) return cmd_plant_check(pc, pc_input, pc_proxy, pc_start, pc_end, pc_min);
  } catch (const Error& e) {
    std::cerr << "liqlab: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "liqlab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
