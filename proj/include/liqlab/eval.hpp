#pragma once

// Confusion matrices, accuracy, feature-subset selection and the report
// writers (JSON report, results table CSV, importance bar charts as SVG).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "liqlab/csv.hpp"
#include "liqlab/dataset.hpp"
#include "liqlab/error.hpp"
#include "liqlab/models.hpp"
#include "liqlab/parallel.hpp"

namespace liqlab {

/// Rows are actual, columns predicted; Up first. Top-left counts correctly
/// predicted Up, bottom-right correctly predicted Down.
struct ConfusionMatrix {
  std::int64_t up_up = 0;
  std::int64_t up_down = 0;
  std::int64_t down_up = 0;
  std::int64_t down_down = 0;

  std::int64_t total() const { return up_up + up_down + down_up + down_down; }
  std::int64_t correct() const { return up_up + down_down; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Direction> actual,
                                 std::span<const Direction> predicted) {
  if (actual.size() != predicted.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(actual.size()) + " actual vs " +
                                               std::to_string(predicted.size()) + " predicted");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool a = actual[i] == Direction::Up;
    const bool p = predicted[i] == Direction::Up;
    (a ? (p ? m.up_up : m.up_down) : (p ? m.down_up : m.down_down))++;
  }
  return m;
}

inline double accuracy(const ConfusionMatrix& m) {
  if (m.total() <= 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix has no entries");
  return static_cast<double>(m.correct()) / static_cast<double>(m.total());
}

/// Accuracy in percent with two decimals, truncated toward zero and computed
/// in integers (31/51 -> "60.78", 32/51 -> "62.74").
inline std::string format_accuracy_percent(const ConfusionMatrix& m) {
  if (m.total() <= 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix has no entries");
  const std::int64_t hundredths = m.correct() * 10000 / m.total();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(hundredths / 100),
                static_cast<long long>(hundredths % 100));
  return buf;
}

inline std::string format_matrix(const ConfusionMatrix& m) {
  return "[[" + std::to_string(m.up_up) + "," + std::to_string(m.up_down) + "],[" +
         std::to_string(m.down_up) + "," + std::to_string(m.down_down) + "]]";
}

inline nlohmann::json to_json(const ConfusionMatrix& m) {
  return nlohmann::json::array({{m.up_up, m.up_down}, {m.down_up, m.down_down}});
}

// ---------------------------------------------------------------------------
// Subset selection

enum class SelectionKind { ForwardStepwise, ImportanceTopK, ExhaustiveSmallK };

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::ForwardStepwise;
  std::size_t k = 0;

  /// "forward", "topk:<k>" or "exhaustive:<k>".
  static SelectionStrategy parse(std::string_view text) {
    auto parse_k = [&](std::string_view digits) {
      std::int64_t k = 0;
      if (!csv::parse_int(digits, k) || k < 1)
        throw Error(ErrorKind::Config, "selection size must be a positive integer in '" +
                                           std::string(text) + "'");
      return static_cast<std::size_t>(k);
    };
    if (text == "forward") return {SelectionKind::ForwardStepwise, 0};
    if (text.starts_with("topk:")) return {SelectionKind::ImportanceTopK, parse_k(text.substr(5))};
    if (text.starts_with("exhaustive:"))
      return {SelectionKind::ExhaustiveSmallK, parse_k(text.substr(11))};
    throw Error(ErrorKind::Config,
                "unknown selection '" + std::string(text) + "' (forward|topk:<k>|exhaustive:<k>)");
  }

  std::string to_string() const {
    switch (kind) {
      case SelectionKind::ForwardStepwise: return "forward";
      case SelectionKind::ImportanceTopK: return "topk:" + std::to_string(k);
      case SelectionKind::ExhaustiveSmallK: return "exhaustive:" + std::to_string(k);
    }
    return "?";
  }
};

inline constexpr std::uint64_t kExhaustiveBudget = 200'000;

struct SubsetResult {
  std::vector<std::size_t> columns;  // ascending column indices
  double validation_accuracy = 0.0;
  std::vector<double> accepted_accuracies;  // forward steps, in order
  std::size_t candidates_evaluated = 0;
};

/// Fits `kind` on train restricted to `columns` and scores it on validation.
inline double validation_accuracy(ModelKind kind, const ModelConfig& config, const Samples& train,
                                  const Samples& validation, std::span<const std::size_t> columns,
                                  unsigned jobs = 1) {
  const Model m = train_model(kind, train.select_columns(columns), config, jobs);
  const Samples val = validation.select_columns(columns);
  return accuracy(confusion(val.y, predict_all(m, val)));
}

/// Number of non-empty subsets of size <= k drawn from d items.
inline std::uint64_t subset_count(std::size_t d, std::size_t k) {
  std::uint64_t total = 0;
  std::uint64_t c = 1;  // C(d, s)
  for (std::size_t s = 1; s <= std::min(k, d); ++s) {
    c = c * (d - s + 1) / s;
    total += c;
    if (total > UINT64_MAX / 4) break;
  }
  return total;
}

namespace detail {

// Evaluates candidates in parallel; picks the highest accuracy, earliest
// candidate on ties, so the choice is independent of thread count.
inline std::pair<std::size_t, double> best_candidate(
    ModelKind kind, const ModelConfig& config, const Samples& train, const Samples& validation,
    const std::vector<std::vector<std::size_t>>& candidates, unsigned jobs) {
  std::vector<double> acc(candidates.size());
  parallel_for(candidates.size(), jobs, [&](std::size_t i) {
    acc[i] = validation_accuracy(kind, config, train, validation, candidates[i]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < acc.size(); ++i)
    if (acc[i] > acc[best]) best = i;
  return {best, acc[best]};
}

}  // namespace detail

/// Chooses a feature subset using validation accuracy only.
inline SubsetResult select_subset(ModelKind kind, const ModelConfig& config, const Samples& train,
                                  const Samples& validation, const SelectionStrategy& strategy,
                                  unsigned jobs = 1) {
  if (validation.size() == 0)
    throw Error(ErrorKind::DatasetTooSmall, "subset selection needs a non-empty validation set");
  const std::size_t d = train.dims();
  SubsetResult out;
  switch (strategy.kind) {
    case SelectionKind::ForwardStepwise: {
      std::vector<std::size_t> chosen;
      double current = -1.0;
      for (;;) {
        std::vector<std::vector<std::size_t>> candidates;
        for (std::size_t f = 0; f < d; ++f) {
          if (std::find(chosen.begin(), chosen.end(), f) != chosen.end()) continue;
          auto c = chosen;
          c.insert(std::upper_bound(c.begin(), c.end(), f), f);
          candidates.push_back(std::move(c));
        }
        if (candidates.empty()) break;
        out.candidates_evaluated += candidates.size();
        const auto [best, acc] =
            detail::best_candidate(kind, config, train, validation, candidates, jobs);
        if (!(acc > current)) break;
        chosen = candidates[best];
        current = acc;
        out.accepted_accuracies.push_back(acc);
      }
      out.columns = chosen;
      out.validation_accuracy = current;
      break;
    }
    case SelectionKind::ImportanceTopK: {
      const std::size_t k = std::min(strategy.k, d);
      const Model full = train_model(kind, train, config, jobs);
      const auto imp = feature_importance(full).values;
      std::vector<std::size_t> order(d);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
      out.columns.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(out.columns.begin(), out.columns.end());
      out.validation_accuracy =
          validation_accuracy(kind, config, train, validation, out.columns, jobs);
      out.candidates_evaluated = 1;
      break;
    }
    case SelectionKind::ExhaustiveSmallK: {
      const std::size_t k = std::min(strategy.k, d);
      const std::uint64_t count = subset_count(d, k);
      if (count > kExhaustiveBudget)
        throw Error(ErrorKind::BudgetExceeded,
                    std::to_string(count) + " candidate subsets exceeds the budget of " +
                        std::to_string(kExhaustiveBudget));
      // Size-major, then lexicographic.
      std::vector<std::vector<std::size_t>> candidates;
      for (std::size_t s = 1; s <= k; ++s) {
        std::vector<std::size_t> idx(s);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
          candidates.push_back(idx);
          std::size_t pos = s;
          while (pos > 0 && idx[pos - 1] == d - s + pos - 1) --pos;
          if (pos == 0) break;
          ++idx[pos - 1];
          for (std::size_t j = pos; j < s; ++j) idx[j] = idx[j - 1] + 1;
        }
      }
      out.candidates_evaluated = candidates.size();
      const auto [best, acc] =
          detail::best_candidate(kind, config, train, validation, candidates, jobs);
      out.columns = candidates[best];
      out.validation_accuracy = acc;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct FeatureSetResult {
  std::vector<std::string> features;
  ConfusionMatrix confusion;
  std::vector<double> importances;  // aligned with features
  bool uniform_importance = false;
  std::optional<double> validation_accuracy;
};

struct ModelEvaluation {
  ModelKind kind = ModelKind::Logistic;
  std::uint64_t seed = 0;
  nlohmann::json config;
  FeatureSetResult all_features;
  std::optional<FeatureSetResult> subset;
  std::string selection;  // strategy string when subset is set
};

struct EvaluationReport {
  nlohmann::json run_config;
  std::string run_config_hash;
  std::int64_t test_rows = 0;
  std::vector<ModelEvaluation> models;
};

inline constexpr int kReportVersion = 1;

inline nlohmann::json to_json(const FeatureSetResult& r) {
  nlohmann::json j{{"features", r.features},
                   {"confusion_matrix", to_json(r.confusion)},
                   {"accuracy", accuracy(r.confusion)},
                   {"accuracy_percent", format_accuracy_percent(r.confusion)},
                   {"importances", r.importances},
                   {"uniform_importance", r.uniform_importance}};
  if (r.validation_accuracy) j["validation_accuracy"] = *r.validation_accuracy;
  return j;
}

inline nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : report.models) {
    nlohmann::json j{{"model", table_name(m.kind)},
                     {"kind", cli_name(m.kind)},
                     {"seed", m.seed},
                     {"config", m.config},
                     {"all_features", to_json(m.all_features)}};
    if (m.subset) {
      j["selection"] = m.selection;
      j["subset"] = to_json(*m.subset);
    }
    models.push_back(std::move(j));
  }
  return {{"format", "liqlab-report"},
          {"version", kReportVersion},
          {"run_config", report.run_config},
          {"run_config_hash", report.run_config_hash},
          {"test_rows", report.test_rows},
          {"models", std::move(models)}};
}

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Format, "report schema: " + where + ": " + what);
}

inline void validate_feature_set(const nlohmann::json& j, const std::string& where,
                                 std::int64_t test_rows) {
  if (!j.is_object()) schema_fail(where, "must be an object");
  if (!j.contains("features")) schema_fail(where, "missing features");
  const auto& f = j["features"];
  if (!f.is_array() || f.empty()) schema_fail(where, "features must be a non-empty array");
  for (const auto& name : f)
    if (!name.is_string()) schema_fail(where, "feature names must be strings");
  if (!j.contains("confusion_matrix")) schema_fail(where, "missing confusion_matrix");
  const auto& cm = j["confusion_matrix"];
  if (!cm.is_array() || cm.size() != 2) schema_fail(where, "confusion_matrix must be 2x2");
  std::int64_t total = 0, correct = 0;
  for (std::size_t r = 0; r < 2; ++r) {
    if (!cm[r].is_array() || cm[r].size() != 2) schema_fail(where, "confusion_matrix must be 2x2");
    for (std::size_t c = 0; c < 2; ++c) {
      if (!cm[r][c].is_number_integer() || cm[r][c].get<std::int64_t>() < 0)
        schema_fail(where, "confusion cells must be non-negative integers");
      total += cm[r][c].get<std::int64_t>();
      if (r == c) correct += cm[r][c].get<std::int64_t>();
    }
  }
  if (total != test_rows) schema_fail(where, "confusion total differs from test_rows");
  if (!j.contains("accuracy") || !j["accuracy"].is_number())
    schema_fail(where, "accuracy must be a number");
  if (total > 0 && j["accuracy"].get<double>() !=
                       static_cast<double>(correct) / static_cast<double>(total))
    schema_fail(where, "accuracy disagrees with confusion_matrix");
  if (!j.contains("accuracy_percent") || !j["accuracy_percent"].is_string())
    schema_fail(where, "accuracy_percent must be a string");
  if (!j.contains("importances") || !j["importances"].is_array() ||
      j["importances"].size() != f.size())
    schema_fail(where, "importances must align with features");
  double sum = 0;
  for (const auto& v : j["importances"]) {
    if (!v.is_number() || v.get<double>() < 0) schema_fail(where, "importances must be >= 0");
    sum += v.get<double>();
  }
  if (std::abs(sum - 1.0) > 1e-9) schema_fail(where, "importances must sum to 1");
  if (!j.contains("uniform_importance") || !j["uniform_importance"].is_boolean())
    schema_fail(where, "uniform_importance must be a boolean");
}

}  // namespace detail

/// Structural check of a report document against the version-1 schema
/// (documented in README.md). Throws Error(Format) naming the first problem.
inline void validate_report_json(const nlohmann::json& j) {
  using detail::schema_fail;
  if (!j.is_object()) schema_fail("$", "must be an object");
  if (j.value("format", "") != "liqlab-report") schema_fail("$.format", "must be liqlab-report");
  if (!j.contains("version") || j["version"] != kReportVersion)
    schema_fail("$.version", "unsupported version");
  if (!j.contains("run_config") || !j["run_config"].is_object())
    schema_fail("$.run_config", "must be an object");
  if (!j.contains("run_config_hash") || !j["run_config_hash"].is_string())
    schema_fail("$.run_config_hash", "must be a string");
  if (!j.contains("test_rows") || !j["test_rows"].is_number_integer())
    schema_fail("$.test_rows", "must be an integer");
  const auto test_rows = j["test_rows"].get<std::int64_t>();
  if (!j.contains("models") || !j["models"].is_array() || j["models"].empty())
    schema_fail("$.models", "must be a non-empty array");
  for (std::size_t i = 0; i < j["models"].size(); ++i) {
    const auto& m = j["models"][i];
    const std::string where = "$.models[" + std::to_string(i) + "]";
    if (!m.is_object()) schema_fail(where, "must be an object");
    const std::string kind = m.value("kind", "");
    if (kind != "lr" && kind != "svm" && kind != "rf") schema_fail(where + ".kind", "bad kind");
    if (!m.contains("model") || m["model"] != table_name(model_kind_from_cli(kind)))
      schema_fail(where + ".model", "must match kind");
    if (!m.contains("seed") || !m["seed"].is_number_unsigned())
      schema_fail(where + ".seed", "must be an unsigned integer");
    if (!m.contains("config") || !m["config"].is_object())
      schema_fail(where + ".config", "must be an object");
    if (!m.contains("all_features")) schema_fail(where, "missing all_features");
    detail::validate_feature_set(m["all_features"], where + ".all_features", test_rows);
    if (m.contains("subset")) {
      if (!m.contains("selection") || !m["selection"].is_string())
        schema_fail(where + ".selection", "required with subset");
      detail::validate_feature_set(m["subset"], where + ".subset", test_rows);
    }
  }
}

/// Results table shaped like Model | All Features | Accuracy_AF |
/// Feature Combination | Accuracy_FC. Subset cells are empty when absent.
inline std::string results_table_csv(const EvaluationReport& report) {
  std::string out = "Model,All Features,Accuracy_AF,Feature Combination,Accuracy_FC\n";
  for (const auto& m : report.models) {
    out += table_name(m.kind);
    out += ",\"" + format_matrix(m.all_features.confusion) + "\",";
    out += format_accuracy_percent(m.all_features.confusion) + "%,";
    if (m.subset) {
      out += "\"" + format_matrix(m.subset->confusion) + "\",";
      out += format_accuracy_percent(m.subset->confusion) + "%";
    } else {
      out += ",";
    }
    out += '\n';
  }
  return out;
}

inline std::string artifact_banner(std::string_view artifact, const std::string& hash) {
  return "# liqlab " + std::string(artifact) + " v1 run_config_hash=" + hash + "\n";
}

inline constexpr double kSvgBarScale = 300.0;  // px per unit importance

/// Vertical bar chart; bar height = importance * kSvgBarScale.
inline std::string importance_svg(const std::string& title, std::span<const std::string> names,
                                  std::span<const double> values) {
  constexpr double bar_w = 24, gap = 8, left = 40, top = 40, label_h = 160;
  const double plot_h = kSvgBarScale;
  const double width = left * 2 + static_cast<double>(values.size()) * (bar_w + gap);
  const double height = top + plot_h + label_h;
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                width, height, width, height);
  out += buf;
  out += "<title>" + title + "</title>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.0f\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">%s</text>\n",
                left, title.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n", left,
                top + plot_h, width - left, top + plot_h);
  out += buf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = left + static_cast<double>(i) * (bar_w + gap) + gap / 2;
    const double h = values[i] * kSvgBarScale;
    std::snprintf(buf, sizeof buf,
                  "<rect class=\"bar\" data-feature=\"%s\" x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" "
                  "height=\"%.4f\" fill=\"steelblue\"/>\n",
                  names[i].c_str(), x, top + plot_h - h, bar_w, h);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.4f\" y=\"%.4f\" font-family=\"sans-serif\" font-size=\"10\" "
                  "transform=\"rotate(60 %.4f %.4f)\">%s</text>\n",
                  x + 4, top + plot_h + 12, x + 4, top + plot_h + 12, names[i].c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

struct ReportNames {
  std::string json = "report.json";
  std::string table = "results.csv";
  std::string chart_suffix;  // importance_<kind><suffix>.svg
  bool chart_subset = false;  // chart the subset importances instead
};

struct ReportPaths {
  std::filesystem::path json;
  std::filesystem::path table;
  std::vector<std::filesystem::path> charts;
};

/// Writes the JSON report, the results table and one importance chart per
/// model under `dir`.
inline ReportPaths render_report(const EvaluationReport& report, const std::filesystem::path& dir,
                                 const ReportNames& names = {}) {
  if (report.models.empty()) throw Error(ErrorKind::Config, "report needs at least one model");
  ReportPaths paths;
  const nlohmann::json j = report_to_json(report);
  validate_report_json(j);
  paths.json = dir / names.json;
  csv::write_file_atomic(paths.json, j.dump(2) + "\n");
  paths.table = dir / names.table;
  csv::write_file_atomic(paths.table,
                         artifact_banner("results", report.run_config_hash) +
                             results_table_csv(report));
  for (const auto& m : report.models) {
    const bool subset = names.chart_subset && m.subset.has_value();
    const FeatureSetResult& r = subset ? *m.subset : m.all_features;
    const auto path =
        dir / ("importance_" + std::string(cli_name(m.kind)) + names.chart_suffix + ".svg");
    csv::write_file_atomic(
        path, "<!-- liqlab importance v1 run_config_hash=" + report.run_config_hash + " -->\n" +
                  importance_svg(std::string(table_name(m.kind)) + " feature importance (" +
                                     (subset ? "selected subset" : "all features") + ")",
                                 r.features, r.importances));
    paths.charts.push_back(path);
  }
  return paths;
}

}  // namespace liqlab
