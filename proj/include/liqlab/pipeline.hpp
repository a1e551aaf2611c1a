#pragma once

// Pipeline stages and their on-disk formats. Stage boundaries are files:
//
//   features  tape.csv            -> features.csv (+ buckets.csv, ingest_report.json)
//   train     features.csv        -> dataset.csv, standardization.json, model_<kind>.json
//   evaluate  train output dir    -> report.json, results.csv, importance_<kind>.svg
//   select    train output dir    -> subset_report.json, subset_results.csv,
//                                    importance_<kind>_subset.svg
//
// CSV artifacts start with one "# liqlab <artifact> v1 run_config_hash=<hex>"
// line; JSON artifacts carry a "run_config_hash" member.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "liqlab/csv.hpp"
#include "liqlab/dataset.hpp"
#include "liqlab/error.hpp"
#include "liqlab/eval.hpp"
#include "liqlab/liquidity.hpp"
#include "liqlab/models.hpp"
#include "liqlab/parallel.hpp"
#include "liqlab/sampler.hpp"
#include "liqlab/tickdata.hpp"
#include "liqlab/timezone.hpp"

namespace liqlab {

namespace fs = std::filesystem;

struct RunConfig {
  // Paths and job count do not affect results and are left out of the hash.
  std::string input;
  std::string out;
  unsigned jobs = 1;

  std::string session_start = "11:00:00";
  std::string session_end = "16:00:00";
  std::string timezone;  // required
  std::string quote_average = "event";  // event-weighted quote means
  SplitSpec split;
  std::vector<Metric> features = all_metrics();
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  ModelConfig model;
  std::string selection = "forward";
  std::uint64_t seed = 42;

  SessionWindow session() const { return SessionWindow::parse(session_start, session_end); }

  /// Fills the per-stage seeds from the master seed.
  void derive_seeds() {
    split.seed = derive_seed(seed, "split");
    model.logistic.seed = derive_seed(seed, "lr");
    model.svm.seed = derive_seed(seed, "svm");
    model.forest.seed = derive_seed(seed, "rf");
  }

  /// `need_timezone` is set by stages that convert timestamps to local time.
  void validate(bool need_timezone) const {
    (void)session();
    if (need_timezone && timezone.empty())
      throw Error(ErrorKind::Config, "--timezone is required");
    if (!timezone.empty()) (void)TimeZone::parse(timezone);
    if (quote_average != "event")
      throw Error(ErrorKind::Config, "quote averaging '" + quote_average + "' is not supported");
    split.validate();
    if (features.empty()) throw Error(ErrorKind::Config, "need at least one feature");
    if (models.empty()) throw Error(ErrorKind::Config, "need at least one model");
    (void)SelectionStrategy::parse(selection);
    const auto& m = model;
    if (!(m.logistic.learning_rate > 0) || m.logistic.epochs < 1 || !(m.logistic.l2 >= 0))
      throw Error(ErrorKind::Config, "bad logistic hyperparameters");
    if (!(m.svm.lambda > 0) || m.svm.epochs < 1)
      throw Error(ErrorKind::Config, "bad svm hyperparameters");
    if (m.forest.n_trees < 1 || m.forest.max_depth < 0 || m.forest.min_samples_leaf < 1)
      throw Error(ErrorKind::Config, "bad forest hyperparameters");
  }

  nlohmann::json to_json() const {
    std::vector<std::string> feature_names, model_names;
    for (Metric f : features) feature_names.emplace_back(name_of(f));
    for (ModelKind k : models) model_names.emplace_back(cli_name(k));
    return {{"session_start", session_start},
            {"session_end", session_end},
            {"timezone", timezone},
            {"quote_average", quote_average},
            {"split",
             {split.train, split.validation, split.test}},
            {"split_mode", split.mode == SplitMode::Chronological ? "chrono" : "shuffled"},
            {"features", feature_names},
            {"models", model_names},
            {"logistic", liqlab::to_json(model.logistic)},
            {"svm", liqlab::to_json(model.svm)},
            {"forest", liqlab::to_json(model.forest)},
            {"selection", selection},
            {"seed", seed}};
  }

  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json().dump())));
    return buf;
  }
};

inline std::vector<std::string> metric_names(std::span<const Metric> metrics) {
  std::vector<std::string> out;
  for (Metric m : metrics) out.emplace_back(name_of(m));
  return out;
}

inline std::vector<Metric> parse_metric_list(std::string_view text) {
  if (text == "all") return all_metrics();
  std::vector<Metric> out;
  std::vector<std::string_view> parts;
  csv::split(text, parts);
  for (auto p : parts) {
    const auto m = metric_from_name(p);
    if (!m) throw Error(ErrorKind::Config, "unknown metric '" + std::string(p) + "'");
    if (std::find(out.begin(), out.end(), *m) != out.end())
      throw Error(ErrorKind::Config, "metric '" + std::string(p) + "' listed twice");
    out.push_back(*m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// features stage

struct FeatureTable {
  std::vector<FeatureRow> rows;       // ticker-major, time-minor
  std::vector<MinuteBucket> buckets;  // aligned with rows
  IngestReport ingest;
  std::size_t session_records = 0;
};

/// ingest -> session filter -> per (ticker, day) bucketize -> metrics.
inline FeatureTable build_features(std::vector<TickRecord> records, const RunConfig& config,
                                   IngestReport ingest = {}) {
  const SessionWindow window = config.session();
  const TimeZone tz = TimeZone::parse(config.timezone);

  std::map<std::string, std::vector<TickRecord>> by_ticker;
  for (auto& r : records) by_ticker[r.ticker].push_back(std::move(r));
  records.clear();
  records.shrink_to_fit();
  std::vector<std::vector<TickRecord>*> tickers;
  for (auto& [_, v] : by_ticker) tickers.push_back(&v);

  // Filter per ticker, then cut into local days.
  std::vector<std::vector<std::vector<TickRecord>>> days(tickers.size());
  parallel_for(tickers.size(), config.jobs, [&](std::size_t i) {
    auto kept = filter_session(*tickers[i], window, tz);
    LocalClock clock(tz);
    std::int64_t current = INT64_MIN;
    for (auto& r : kept) {
      const std::int64_t day = clock.local_day(r.timestamp);
      if (day != current) {
        days[i].emplace_back();
        current = day;
      }
      days[i].back().push_back(std::move(r));
    }
  });

  struct Shard {
    const std::vector<TickRecord>* records;
    std::vector<MinuteBucket> buckets;
    std::vector<FeatureRow> rows;
  };
  std::vector<Shard> shards;
  FeatureTable table;
  table.ingest = std::move(ingest);
  for (auto& per_ticker : days)
    for (auto& day : per_ticker) {
      table.session_records += day.size();
      shards.push_back({&day, {}, {}});
    }

  parallel_for(shards.size(), config.jobs, [&](std::size_t i) {
    Shard& s = shards[i];
    s.buckets = bucketize(*s.records);
    LocalClock clock(tz);
    for (std::size_t b = 0; b < s.buckets.size(); ++b) {
      const MinuteBucket& bucket = s.buckets[b];
      s.rows.push_back({bucket.ticker, clock.local_day(bucket.minute_start), bucket.minute_start,
                        bucket.first_trade_price,
                        compute_feature_vector(bucket, b > 0 ? &s.buckets[b - 1] : nullptr)});
    }
  });
  for (auto& s : shards) {
    std::move(s.buckets.begin(), s.buckets.end(), std::back_inserter(table.buckets));
    std::move(s.rows.begin(), s.rows.end(), std::back_inserter(table.rows));
  }
  return table;
}

/// Column order: ticker, session_date, minute_start, first_trade_price, the
/// metrics in Metric order, then valid_<metric> flags (0/1) in the same order.
inline std::string feature_csv_header() {
  std::string h = "ticker,session_date,minute_start,first_trade_price";
  for (auto n : kMetricNames) h += "," + std::string(n);
  for (auto n : kMetricNames) h += ",valid_" + std::string(n);
  return h;
}

inline std::string serialize_features(std::span<const FeatureRow> rows, const std::string& hash) {
  std::string out = artifact_banner("features", hash) + feature_csv_header() + "\n";
  for (const auto& r : rows) {
    out += r.ticker;
    out += ',';
    out += format_date(r.session_day);
    out += ',';
    out += std::to_string(r.minute_start);
    out += ',';
    csv::append_double(out, r.first_trade_price);
    for (double v : r.features.values) {
      out += ',';
      csv::append_double(out, v);
    }
    for (bool v : r.features.valid) out += v ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

namespace detail {

// Skips '#' banner lines and checks the header.
inline void expect_header(csv::LineReader& lines, const std::string& header,
                          std::string_view what) {
  std::string_view line;
  while (lines.next(line))
    if (!line.starts_with('#')) break;
  if (line != header) throw Error(ErrorKind::Format, std::string(what) + ": unexpected header");
}

[[noreturn]] inline void bad_row(std::string_view what, std::size_t line) {
  throw Error(ErrorKind::Format, std::string(what) + ": malformed row at line " +
                                     std::to_string(line));
}

}  // namespace detail

inline std::vector<FeatureRow> parse_features(std::string_view bytes) {
  csv::LineReader lines(bytes);
  detail::expect_header(lines, feature_csv_header(), "features CSV");
  std::vector<FeatureRow> rows;
  std::vector<std::string_view> f;
  std::string_view line;
  while (lines.next(line)) {
    if (line.empty()) continue;
    csv::split(line, f);
    if (f.size() != 4 + 2 * kMetricCount) detail::bad_row("features CSV", lines.line_number());
    FeatureRow r;
    r.ticker = std::string(f[0]);
    try {
      r.session_day = parse_date(f[1]);
    } catch (const Error&) {
      detail::bad_row("features CSV", lines.line_number());
    }
    if (!csv::parse_int(f[2], r.minute_start) || !csv::parse_double(f[3], r.first_trade_price))
      detail::bad_row("features CSV", lines.line_number());
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      if (!csv::parse_double(f[4 + i], r.features.values[i]))
        detail::bad_row("features CSV", lines.line_number());
      const auto flag = f[4 + kMetricCount + i];
      if (flag != "0" && flag != "1") detail::bad_row("features CSV", lines.line_number());
      r.features.valid[i] = flag == "1";
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string serialize_buckets(std::span<const MinuteBucket> buckets,
                                     const std::string& hash) {
  std::string out = artifact_banner("buckets", hash) + std::string(kBucketHeader) + "\n";
  for (const auto& b : buckets) append_bucket_row(out, b);
  return out;
}

inline nlohmann::json to_json(const IngestReport& r, std::size_t session_records,
                              std::size_t feature_rows, const std::string& hash) {
  nlohmann::json issues = nlohmann::json::array();
  for (const auto& i : r.issues) issues.push_back({{"line", i.line}, {"reason", i.reason}});
  return {{"run_config_hash", hash},
          {"accepted", r.accepted},
          {"rejected_malformed", r.rejected_malformed},
          {"rejected_crossed", r.rejected_crossed},
          {"session_records", session_records},
          {"feature_rows", feature_rows},
          {"issues", issues}};
}

// ---------------------------------------------------------------------------
// train stage

inline std::string_view split_name(const SplitDataset& ds, std::size_t row) {
  return row < ds.train_end ? "train" : row < ds.val_end ? "val" : "test";
}

/// ticker, session_date, minute_start, label, split, then the active
/// features (raw, unstandardized) in the dataset's feature order.
inline std::string dataset_csv_header(std::span<const Metric> features) {
  std::string h = "ticker,session_date,minute_start,label,split";
  for (Metric m : features) h += "," + std::string(name_of(m));
  return h;
}

inline std::string serialize_dataset(const SplitDataset& ds, const std::string& hash) {
  std::string out = artifact_banner("dataset", hash) + dataset_csv_header(ds.features) + "\n";
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& r = ds.rows[i];
    out += r.ticker;
    out += ',';
    out += format_date(r.session_day);
    out += ',';
    out += std::to_string(r.minute_start);
    out += ',';
    out += to_string(r.label);
    out += ',';
    out += split_name(ds, i);
    for (Metric m : ds.features) {
      out += ',';
      csv::append_double(out, r.features[m]);
    }
    out += '\n';
  }
  return out;
}

/// Rebuilds a SplitDataset from dataset.csv and the stored standardization.
inline SplitDataset parse_dataset(std::string_view bytes, const Standardizer& standardizer) {
  SplitDataset ds;
  for (const auto& name : standardizer.features) {
    const auto m = metric_from_name(name);
    if (!m) throw Error(ErrorKind::Format, "standardization names unknown metric " + name);
    ds.features.push_back(*m);
  }
  ds.standardizer = standardizer;
  csv::LineReader lines(bytes);
  detail::expect_header(lines, dataset_csv_header(ds.features), "dataset CSV");
  std::vector<std::string_view> f;
  std::string_view line;
  int phase = 0;  // 0 train, 1 val, 2 test; must not go backwards
  std::vector<double> x(ds.features.size());
  while (lines.next(line)) {
    if (line.empty()) continue;
    csv::split(line, f);
    if (f.size() != 5 + ds.features.size()) detail::bad_row("dataset CSV", lines.line_number());
    LabeledRow r;
    r.ticker = std::string(f[0]);
    try {
      r.session_day = parse_date(f[1]);
    } catch (const Error&) {
      detail::bad_row("dataset CSV", lines.line_number());
    }
    if (!csv::parse_int(f[2], r.minute_start)) detail::bad_row("dataset CSV", lines.line_number());
    if (f[3] == "Up")
      r.label = Direction::Up;
    else if (f[3] == "Down")
      r.label = Direction::Down;
    else
      detail::bad_row("dataset CSV", lines.line_number());
    const int p = f[4] == "train" ? 0 : f[4] == "val" ? 1 : f[4] == "test" ? 2 : -1;
    if (p < phase) detail::bad_row("dataset CSV", lines.line_number());
    phase = p;
    for (std::size_t c = 0; c < ds.features.size(); ++c) {
      double v;
      if (!csv::parse_double(f[5 + c], v)) detail::bad_row("dataset CSV", lines.line_number());
      r.features.set(ds.features[c], v);
      x[c] = v;
    }
    standardizer.apply(x);
    (p == 0 ? ds.train : p == 1 ? ds.validation : ds.test).push(x, r.label);
    ds.rows.push_back(std::move(r));
    if (p == 0) ds.train_end = ds.rows.size();
    if (p <= 1) ds.val_end = ds.rows.size();
  }
  for (Samples* s : {&ds.train, &ds.validation, &ds.test})
    if (s->x.cols() == 0) s->x = Matrix(0, ds.features.size());
  return ds;
}

struct TrainedModels {
  SplitDataset dataset;
  AssemblyCounts counts;
  std::vector<std::pair<ModelKind, Model>> models;
};

inline TrainedModels train_stage(std::span<const FeatureRow> rows, const RunConfig& config) {
  TrainedModels out;
  auto labeled = assemble_rows(rows, config.features, &out.counts);
  out.dataset = split(std::move(labeled), config.features, config.split);
  for (ModelKind k : config.models)
    out.models.emplace_back(k, train_model(k, out.dataset.train, config.model, config.jobs));
  return out;
}

inline nlohmann::json summary_json(const TrainedModels& t, const std::string& hash) {
  return {{"run_config_hash", hash},
          {"feature_rows", t.counts.input},
          {"dropped_no_successor", t.counts.no_successor},
          {"dropped_ties", t.counts.ties},
          {"dropped_masked", t.counts.masked},
          {"labeled_rows", t.counts.kept},
          {"train_rows", t.dataset.train_end},
          {"validation_rows", t.dataset.val_end - t.dataset.train_end},
          {"test_rows", t.dataset.rows.size() - t.dataset.val_end}};
}

/// Writes dataset.csv, standardization.json, dataset_summary.json and one
/// model_<kind>.json per model.
inline void write_train_outputs(const TrainedModels& t, const RunConfig& config,
                                const fs::path& dir) {
  const std::string hash = config.hash();
  csv::write_file_atomic(dir / "dataset.csv", serialize_dataset(t.dataset, hash));
  auto stdj = t.dataset.standardizer.to_json();
  stdj["run_config_hash"] = hash;
  csv::write_file_atomic(dir / "standardization.json", stdj.dump(2) + "\n");
  csv::write_file_atomic(dir / "dataset_summary.json", summary_json(t, hash).dump(2) + "\n");
  const auto names = metric_names(t.dataset.features);
  const std::string std_hash = t.dataset.standardizer.hash();
  for (const auto& [kind, model] : t.models) {
    auto j = model_to_json(model, names, std_hash);
    j["run_config_hash"] = hash;
    j["run_config"] = config.to_json();
    csv::write_file_atomic(dir / ("model_" + std::string(cli_name(kind)) + ".json"),
                           j.dump() + "\n");
  }
}

struct LoadedTraining {
  SplitDataset dataset;
  std::vector<std::pair<ModelKind, Model>> models;
};

inline nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

/// Loads a train-stage directory: the dataset plus the requested models.
inline LoadedTraining load_training(const fs::path& dir, std::span<const ModelKind> kinds) {
  LoadedTraining out;
  const Standardizer st = Standardizer::from_json(read_json(dir / "standardization.json"));
  out.dataset = parse_dataset(csv::read_file(dir / "dataset.csv"), st);
  const std::string std_hash = st.hash();
  for (ModelKind k : kinds) {
    auto loaded = model_from_json(read_json(dir / ("model_" + std::string(cli_name(k)) + ".json")));
    if (loaded.standardization_hash != std_hash)
      throw Error(ErrorKind::Format, "model_" + std::string(cli_name(k)) +
                                         ".json was trained under a different standardization");
    if (loaded.features != st.features)
      throw Error(ErrorKind::Format, "model feature list differs from the dataset");
    out.models.emplace_back(k, std::move(loaded.model));
  }
  return out;
}

// ---------------------------------------------------------------------------
// evaluate / select stages

inline nlohmann::json model_config_json(const Model& m) {
  if (const auto* lin = std::get_if<LinearModel>(&m))
    return lin->kind == ModelKind::Logistic ? to_json(lin->logistic) : to_json(lin->svm);
  return to_json(std::get<ForestModel>(m).config);
}

inline std::uint64_t model_seed(const Model& m) {
  if (const auto* lin = std::get_if<LinearModel>(&m))
    return lin->kind == ModelKind::Logistic ? lin->logistic.seed : lin->svm.seed;
  return std::get<ForestModel>(m).config.seed;
}

inline FeatureSetResult evaluate_on_test(const Model& m, const Samples& test,
                                         std::vector<std::string> names) {
  FeatureSetResult r;
  r.features = std::move(names);
  r.confusion = confusion(test.y, predict_all(m, test));
  const auto imp = feature_importance(m);
  r.importances = imp.values;
  r.uniform_importance = imp.uniform_fallback;
  return r;
}

inline EvaluationReport evaluate_stage(const LoadedTraining& t, const RunConfig& config) {
  if (t.dataset.test.size() == 0) throw Error(ErrorKind::DatasetTooSmall, "empty test set");
  EvaluationReport report;
  report.run_config = config.to_json();
  report.run_config_hash = config.hash();
  report.test_rows = static_cast<std::int64_t>(t.dataset.test.size());
  const auto names = metric_names(t.dataset.features);
  for (const auto& [kind, model] : t.models) {
    ModelEvaluation e;
    e.kind = kind;
    e.seed = model_seed(model);
    e.config = model_config_json(model);
    e.all_features = evaluate_on_test(model, t.dataset.test, names);
    report.models.push_back(std::move(e));
  }
  return report;
}

/// All-features results from the stored models, then subset search on
/// train/validation and one test evaluation of each refitted subset model.
inline EvaluationReport select_stage(const LoadedTraining& t, const RunConfig& config) {
  EvaluationReport report = evaluate_stage(t, config);
  const auto strategy = SelectionStrategy::parse(config.selection);
  const auto names = metric_names(t.dataset.features);
  for (auto& e : report.models) {
    const auto subset = select_subset(e.kind, config.model, t.dataset.train, t.dataset.validation,
                                      strategy, config.jobs);
    std::vector<std::string> chosen;
    for (std::size_t c : subset.columns) chosen.push_back(names[c]);
    const Model m =
        train_model(e.kind, t.dataset.train.select_columns(subset.columns), config.model,
                    config.jobs);
    e.subset = evaluate_on_test(m, t.dataset.test.select_columns(subset.columns), chosen);
    e.subset->validation_accuracy = subset.validation_accuracy;
    e.selection = strategy.to_string();
  }
  return report;
}

}  // namespace liqlab
