#pragma once

// Labeling, design-matrix assembly, standardization and the train /
// validation / test split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "liqlab/error.hpp"
#include "liqlab/liquidity.hpp"
#include "liqlab/rng.hpp"

namespace liqlab {

enum class Direction : std::uint8_t { Down = 0, Up = 1 };

inline std::string_view to_string(Direction d) { return d == Direction::Up ? "Up" : "Down"; }

/// Row-major dense matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void push_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Feature matrix plus labels, the unit every trainer consumes.
struct Samples {
  Matrix x;
  std::vector<Direction> y;

  std::size_t size() const { return y.size(); }
  std::size_t dims() const { return x.cols(); }

  void push(std::span<const double> features, Direction label) {
    x.push_row(features);
    y.push_back(label);
  }

  /// Copy restricted to the given feature columns.
  Samples select_columns(std::span<const std::size_t> columns) const {
    Samples out;
    out.x = Matrix(x.rows(), columns.size());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < columns.size(); ++c) out.x(r, c) = x(r, columns[c]);
    out.y = y;
    return out;
  }
};

/// Row t is Up if the next price is higher, Down if lower; ties and the final
/// element (no successor) have no label.
inline std::vector<std::optional<Direction>> label_rows(std::span<const double> prices) {
  std::vector<std::optional<Direction>> out(prices.size());
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) {
    if (prices[t + 1] > prices[t])
      out[t] = Direction::Up;
    else if (prices[t + 1] < prices[t])
      out[t] = Direction::Down;
  }
  return out;
}

/// One minute of the feature table, as produced by the features stage.
struct FeatureRow {
  std::string ticker;
  std::int64_t session_day = 0;  // local calendar day, days since 1970-01-01
  std::int64_t minute_start = 0;
  double first_trade_price = 0.0;
  FeatureVector features;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct LabeledRow {
  std::string ticker;
  std::int64_t session_day = 0;
  std::int64_t minute_start = 0;
  FeatureVector features;
  Direction label = Direction::Down;
};

struct AssemblyCounts {
  std::size_t input = 0;
  std::size_t no_successor = 0;
  std::size_t ties = 0;
  std::size_t masked = 0;
  std::size_t kept = 0;
};

inline std::vector<Metric> all_metrics() {
  std::vector<Metric> out;
  for (std::size_t i = 0; i < kMetricCount; ++i) out.push_back(static_cast<Metric>(i));
  return out;
}

/// Labels each ticker-day group of `rows` (ticker-major, time-minor) and
/// drops unlabeled rows and rows with a masked metric among `active`.
inline std::vector<LabeledRow> assemble_rows(std::span<const FeatureRow> rows,
                                             std::span<const Metric> active,
                                             AssemblyCounts* counts = nullptr) {
  AssemblyCounts c;
  c.input = rows.size();
  std::vector<LabeledRow> out;
  std::vector<double> prices;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].ticker == rows[begin].ticker &&
           rows[end].session_day == rows[begin].session_day)
      ++end;
    prices.clear();
    for (std::size_t i = begin; i < end; ++i) prices.push_back(rows[i].first_trade_price);
    const auto labels = label_rows(prices);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& label = labels[i - begin];
      if (!label) {
        (i + 1 == end ? c.no_successor : c.ties)++;
        continue;
      }
      const bool masked = std::any_of(active.begin(), active.end(),
                                      [&](Metric m) { return !rows[i].features.is_valid(m); });
      if (masked) {
        ++c.masked;
        continue;
      }
      out.push_back({rows[i].ticker, rows[i].session_day, rows[i].minute_start, rows[i].features,
                     *label});
    }
    begin = end;
  }
  c.kept = out.size();
  if (counts) *counts = c;
  return out;
}

/// Per-feature affine standardization fitted on the training slice.
struct Standardizer {
  std::vector<std::string> features;
  std::vector<double> mean;
  std::vector<double> stddev;  // population (ddof = 0)

  static Standardizer fit(const Matrix& x, std::size_t begin, std::size_t end,
                          std::vector<std::string> names) {
    Standardizer s;
    s.features = std::move(names);
    const std::size_t d = x.cols();
    const auto n = static_cast<double>(end - begin);
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
      double sum = 0;
      for (std::size_t r = begin; r < end; ++r) sum += x(r, c);
      const double mu = sum / n;
      double ss = 0;
      for (std::size_t r = begin; r < end; ++r) ss += (x(r, c) - mu) * (x(r, c) - mu);
      const double sd = std::sqrt(ss / n);
      bool constant = true;
      for (std::size_t r = begin + 1; r < end && constant; ++r) constant = x(r, c) == x(begin, c);
      if (constant || !(sd > 0) || !std::isfinite(sd))
        throw Error(ErrorKind::ZeroVariance,
                    "feature '" + (c < s.features.size() ? s.features[c] : std::to_string(c)) +
                        "' has zero variance on the training slice");
      s.mean[c] = mu;
      s.stddev[c] = sd;
    }
    return s;
  }

  void apply(std::span<double> row) const {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / stddev[c];
  }

  nlohmann::json to_json() const {
    return {{"format", "liqlab-standardization"},
            {"version", 1},
            {"features", features},
            {"mean", mean},
            {"std", stddev}};
  }

  static Standardizer from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "liqlab-standardization" || j.value("version", 0) != 1)
      throw Error(ErrorKind::Format, "not a version-1 standardization document");
    Standardizer s;
    s.features = j.at("features").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("std").get<std::vector<double>>();
    if (s.mean.size() != s.features.size() || s.stddev.size() != s.features.size())
      throw Error(ErrorKind::Format, "standardization arrays disagree in length");
    return s;
  }

  /// Hex FNV-1a of the canonical JSON; models record it to pin their inputs.
  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json().dump())));
    return buf;
  }
};

enum class SplitMode { Chronological, Shuffled };

/// Percentages of train / validation / test; must sum to 100.
struct SplitSpec {
  int train = 70;
  int validation = 15;
  int test = 15;
  SplitMode mode = SplitMode::Chronological;
  std::uint64_t seed = 0;  // used only for Shuffled

  void validate() const {
    if (train <= 0 || validation < 0 || test <= 0 || train + validation + test != 100)
      throw Error(ErrorKind::Config, "split percentages must be positive and sum to 100");
  }
};

inline constexpr std::size_t kMinDatasetRows = 20;

struct SplitDataset {
  std::vector<LabeledRow> rows;  // in split order
  std::size_t train_end = 0;     // rows [0, train_end) are train
  std::size_t val_end = 0;       // [train_end, val_end) validation, rest test
  std::vector<Metric> features;
  Standardizer standardizer;
  Samples train, validation, test;  // standardized

  std::size_t size() const { return rows.size(); }
};

/// Boundaries floor(train% * n / 100) and floor((train% + val%) * n / 100).
inline std::pair<std::size_t, std::size_t> split_boundaries(std::size_t n, const SplitSpec& spec) {
  return {n * static_cast<std::size_t>(spec.train) / 100,
          n * static_cast<std::size_t>(spec.train + spec.validation) / 100};
}

inline Matrix raw_matrix(std::span<const LabeledRow> rows, std::span<const Metric> features) {
  Matrix x(rows.size(), features.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < features.size(); ++c) x(r, c) = rows[r].features[features[c]];
  return x;
}

inline SplitDataset split(std::vector<LabeledRow> rows, std::span<const Metric> features,
                          const SplitSpec& spec = {}) {
  spec.validate();
  if (rows.size() < kMinDatasetRows)
    throw Error(ErrorKind::DatasetTooSmall, std::to_string(rows.size()) + " labeled rows, need at least " +
                                                std::to_string(kMinDatasetRows));
  if (spec.mode == SplitMode::Shuffled) {
    Rng rng(derive_seed(spec.seed, "split"));
    for (std::size_t i = rows.size() - 1; i > 0; --i) std::swap(rows[i], rows[rng.below(i + 1)]);
  }
  SplitDataset ds;
  ds.features.assign(features.begin(), features.end());
  std::tie(ds.train_end, ds.val_end) = split_boundaries(rows.size(), spec);
  ds.rows = std::move(rows);

  Matrix x = raw_matrix(ds.rows, ds.features);
  std::vector<std::string> names;
  for (Metric m : ds.features) names.emplace_back(name_of(m));
  ds.standardizer = Standardizer::fit(x, 0, ds.train_end, std::move(names));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    ds.standardizer.apply(row);
    Samples& target = r < ds.train_end ? ds.train : r < ds.val_end ? ds.validation : ds.test;
    target.push(row, ds.rows[r].label);
  }
  for (Samples* s : {&ds.train, &ds.validation, &ds.test})
    if (s->x.cols() == 0) s->x = Matrix(0, ds.features.size());
  return ds;
}

}  // namespace liqlab
