#pragma once

// Direction classifiers: L2-regularized logistic regression (full-batch
// gradient descent), linear SVM (Pegasos-style stochastic subgradient
// descent) and a CART random forest with Gini splits. All training is
// deterministic given the config seed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "liqlab/dataset.hpp"
#include "liqlab/error.hpp"
#include "liqlab/parallel.hpp"
#include "liqlab/rng.hpp"

namespace liqlab {

enum class ModelKind { Logistic, Svm, Forest };

inline constexpr std::array<ModelKind, 3> kAllModelKinds = {ModelKind::Logistic, ModelKind::Svm,
                                                            ModelKind::Forest};

/// Short name used on the command line and in file names.
inline std::string_view cli_name(ModelKind k) {
  switch (k) {
    case ModelKind::Logistic: return "lr";
    case ModelKind::Svm: return "svm";
    case ModelKind::Forest: return "rf";
  }
  return "?";
}

/// Row label used in the results table.
inline std::string_view table_name(ModelKind k) {
  switch (k) {
    case ModelKind::Logistic: return "LOG";
    case ModelKind::Svm: return "SVM";
    case ModelKind::Forest: return "RF";
  }
  return "?";
}

inline ModelKind model_kind_from_cli(std::string_view s) {
  for (ModelKind k : kAllModelKinds)
    if (cli_name(k) == s) return k;
  throw Error(ErrorKind::Config, "unknown model '" + std::string(s) + "' (lr|svm|rf)");
}

struct Prediction {
  Direction label = Direction::Down;
  double score = 0.5;  // in [0, 1]; higher means more Up
};

// ---------------------------------------------------------------------------
// Linear models

struct LogisticConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-3;
  double init_scale = 0.0;  // > 0: weights start N(0, init_scale) from seed
  std::uint64_t seed = 0;
};

struct SvmConfig {
  double lambda = 1e-2;
  int epochs = 200;
  std::uint64_t seed = 0;
};

struct LinearModel {
  ModelKind kind = ModelKind::Logistic;
  std::vector<double> weights;
  double bias = 0.0;
  double margin_min = 0.0;  // SVM score calibration over training margins
  double margin_max = 0.0;
  LogisticConfig logistic;
  SvmConfig svm;
  std::vector<double> objective_trace;  // per epoch; not serialized

  std::size_t dims() const { return weights.size(); }

  double margin(std::span<const double> x) const {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
    return z;
  }
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ln(1 + e^z) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

inline void require_dims(const Samples& data, std::size_t dims) {
  if (data.dims() != dims)
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(dims) +
                                                  " features, got " + std::to_string(data.dims()));
}

}  // namespace detail

/// Mean negative log-likelihood plus (l2/2)||w||^2; labels Up = 1, Down = 0.
/// The bias is not regularized.
inline double logistic_objective(const Samples& data, std::span<const double> w, double b,
                                 double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = detail::dot(w, data.x.row(i)) + b;
    const double y = data.y[i] == Direction::Up ? 1.0 : 0.0;
    loss += detail::softplus(z) - y * z;
  }
  loss /= static_cast<double>(data.size());
  return loss + 0.5 * l2 * detail::dot(w, w);
}

/// Gradient of logistic_objective; the last element is d/d(bias).
inline std::vector<double> logistic_gradient(const Samples& data, std::span<const double> w,
                                             double b, double l2) {
  const std::size_t d = w.size();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.x.row(i);
    const double y = data.y[i] == Direction::Up ? 1.0 : 0.0;
    const double r = detail::sigmoid(detail::dot(w, x) + b) - y;
    for (std::size_t j = 0; j < d; ++j) g[j] += r * x[j];
    g[d] += r;
  }
  const auto n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < d; ++j) g[j] = g[j] / n + l2 * w[j];
  g[d] /= n;
  return g;
}

/// (lambda/2)(||w||^2 + b^2) + mean hinge loss; labels Up = +1, Down = -1.
/// The bias is regularized like a weight on a constant feature, which keeps
/// the 1/(lambda t) step schedule stable for it.
inline double svm_objective(const Samples& data, std::span<const double> w, double b,
                            double lambda) {
  double hinge = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.y[i] == Direction::Up ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * (detail::dot(w, data.x.row(i)) + b));
  }
  hinge /= static_cast<double>(data.size());
  return 0.5 * lambda * (detail::dot(w, w) + b * b) + hinge;
}

/// Subgradient of svm_objective (exact gradient away from margin = 1).
inline std::vector<double> svm_subgradient(const Samples& data, std::span<const double> w,
                                           double b, double lambda) {
  const std::size_t d = w.size();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.x.row(i);
    const double y = data.y[i] == Direction::Up ? 1.0 : -1.0;
    if (y * (detail::dot(w, x) + b) < 1.0) {
      for (std::size_t j = 0; j < d; ++j) g[j] -= y * x[j];
      g[d] -= y;
    }
  }
  const auto n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < d; ++j) g[j] = g[j] / n + lambda * w[j];
  g[d] = g[d] / n + lambda * b;
  return g;
}

inline LinearModel train_logistic(const Samples& data, const LogisticConfig& config = {}) {
  if (data.size() == 0) throw Error(ErrorKind::DatasetTooSmall, "no training rows");
  LinearModel m;
  m.kind = ModelKind::Logistic;
  m.logistic = config;
  m.weights.assign(data.dims(), 0.0);
  if (config.init_scale > 0) {
    Rng rng(derive_seed(config.seed, "logistic-init"));
    for (double& w : m.weights) w = rng.normal(0.0, config.init_scale);
  }
  const std::size_t d = data.dims();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto g = logistic_gradient(data, m.weights, m.bias, config.l2);
    for (std::size_t j = 0; j < d; ++j) m.weights[j] -= config.learning_rate * g[j];
    m.bias -= config.learning_rate * g[d];
    const double obj = logistic_objective(data, m.weights, m.bias, config.l2);
    if (!std::isfinite(obj))
      throw Error(ErrorKind::NonFiniteLoss,
                  "logistic objective diverged at epoch " + std::to_string(epoch + 1) +
                      "; lower the learning rate");
    m.objective_trace.push_back(obj);
  }
  return m;
}

inline LinearModel train_svm(const Samples& data, const SvmConfig& config = {}) {
  if (data.size() == 0) throw Error(ErrorKind::DatasetTooSmall, "no training rows");
  if (!(config.lambda > 0)) throw Error(ErrorKind::Config, "svm lambda must be > 0");
  LinearModel m;
  m.kind = ModelKind::Svm;
  m.svm = config;
  const std::size_t d = data.dims();
  const std::size_t n = data.size();
  // w/b is the Pegasos iterate; the model keeps the running mean of iterates.
  std::vector<double> w(d, 0.0), w_sum(d, 0.0);
  double b = 0.0, b_sum = 0.0;
  m.weights.assign(d, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, "svm-shuffle"));
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * config.lambda;
      const auto x = data.x.row(i);
      const double y = data.y[i] == Direction::Up ? 1.0 : -1.0;
      const bool violated = y * (detail::dot(w, x) + b) < 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        w[j] = shrink * w[j] + (violated ? eta * y * x[j] : 0.0);
        w_sum[j] += w[j];
      }
      b = shrink * b + (violated ? eta * y : 0.0);
      b_sum += b;
    }
    const auto steps = static_cast<double>(t);
    for (std::size_t j = 0; j < d; ++j) m.weights[j] = w_sum[j] / steps;
    m.bias = b_sum / steps;
    const double obj = svm_objective(data, m.weights, m.bias, config.lambda);
    if (!std::isfinite(obj))
      throw Error(ErrorKind::NonFiniteLoss, "svm objective diverged at epoch " +
                                                std::to_string(epoch + 1));
    m.objective_trace.push_back(obj);
  }
  m.margin_min = m.margin_max = m.margin(data.x.row(0));
  for (std::size_t i = 1; i < n; ++i) {
    const double z = m.margin(data.x.row(i));
    m.margin_min = std::min(m.margin_min, z);
    m.margin_max = std::max(m.margin_max, z);
  }
  return m;
}

/// Logistic: Up iff sigmoid > 0.5 (exactly 0.5 is Down). SVM: Up iff the
/// margin is positive; the score is the margin min-max scaled over training
/// margins and clipped to [0, 1].
inline Prediction predict(const LinearModel& m, std::span<const double> x) {
  if (x.size() != m.dims())
    throw Error(ErrorKind::DimensionMismatch, "model has " + std::to_string(m.dims()) +
                                                  " features, row has " + std::to_string(x.size()));
  const double z = m.margin(x);
  if (m.kind == ModelKind::Logistic) {
    const double p = detail::sigmoid(z);
    return {p > 0.5 ? Direction::Up : Direction::Down, p};
  }
  const double range = m.margin_max - m.margin_min;
  const double score = range > 0 ? std::clamp((z - m.margin_min) / range, 0.0, 1.0) : 0.5;
  return {z > 0 ? Direction::Up : Direction::Down, score};
}

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  int n_trees = 200;
  int max_depth = 12;  // 0 = unlimited
  int min_samples_leaf = 5;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

/// Flattened CART tree. Node i is a leaf when feature[i] < 0; otherwise rows
/// with x[feature] <= threshold go to left[i], the rest to right[i].
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<int> up;  // class counts of the training rows reaching the node
  std::vector<int> down;
  std::vector<double> importance;  // raw weighted impurity decrease per feature

  std::size_t node_count() const { return feature.size(); }

  int leaf_for(std::span<const double> x) const {
    int node = 0;
    while (feature[node] >= 0) node = x[feature[node]] <= threshold[node] ? left[node] : right[node];
    return node;
  }

  /// Leaf majority; a tied leaf votes Down.
  Direction vote(std::span<const double> x) const {
    const int leaf = leaf_for(x);
    return up[leaf] > down[leaf] ? Direction::Up : Direction::Down;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct ForestModel {
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  ForestConfig config;

  std::size_t dims() const { return n_features; }
};

namespace detail {

inline double gini(double up, double down) {
  const double n = up + down;
  if (n <= 0) return 0.0;
  const double p = up / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeBuilder {
public:
  TreeBuilder(const Samples& data, const ForestConfig& config, std::size_t mtry,
              std::uint64_t seed)
      : data_(data), config_(config), mtry_(mtry), rng_(seed) {}

  Tree build(std::vector<std::size_t> rows) {
    tree_.importance.assign(data_.dims(), 0.0);
    features_.resize(data_.dims());
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = -1.0;
  };

  int add_node(int up, int down) {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.up.push_back(up);
    tree_.down.push_back(down);
    return static_cast<int>(tree_.feature.size() - 1);
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    int up = 0;
    for (std::size_t r : rows) up += data_.y[r] == Direction::Up;
    const int down = static_cast<int>(rows.size()) - up;
    const int node = add_node(up, down);
    const auto leaf_min = static_cast<std::size_t>(std::max(1, config_.min_samples_leaf));
    if (up == 0 || down == 0 || (config_.max_depth > 0 && depth >= config_.max_depth) ||
        rows.size() < 2 * leaf_min)
      return node;

    const Split best = find_split(rows, up, down, leaf_min);
    if (best.feature < 0) return node;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
      (data_.x(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree_.importance[best.feature] += best.decrease;
    tree_.feature[node] = best.feature;
    tree_.threshold[node] = best.threshold;
    const int l = grow(std::move(left_rows), depth + 1);
    tree_.left[node] = l;
    const int r = grow(std::move(right_rows), depth + 1);
    tree_.right[node] = r;
    return node;
  }

  Split find_split(const std::vector<std::size_t>& rows, int up, int down, std::size_t leaf_min) {
    // Candidates come from a lazy Fisher-Yates shuffle: mtry_ features, then
    // more only while none of them admits a split (all constant here).
    std::iota(features_.begin(), features_.end(), 0);
    const auto n = static_cast<double>(rows.size());
    const double parent = n * gini(up, down);
    Split best;
    for (std::size_t k = 0; k < features_.size(); ++k) {
      if (k >= mtry_ && best.feature >= 0) break;
      std::swap(features_[k], features_[k + rng_.below(features_.size() - k)]);
      const std::size_t f = features_[k];
      column_.clear();
      for (std::size_t r : rows) column_.push_back({data_.x(r, f), data_.y[r] == Direction::Up});
      std::sort(column_.begin(), column_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      int left_up = 0;
      for (std::size_t i = 0; i + 1 < column_.size(); ++i) {
        left_up += column_[i].second;
        if (column_[i].first == column_[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = column_.size() - nl;
        if (nl < leaf_min || nr < leaf_min) continue;
        const int left_down = static_cast<int>(nl) - left_up;
        const double child = static_cast<double>(nl) * gini(left_up, left_down) +
                             static_cast<double>(nr) * gini(up - left_up, down - left_down);
        const double decrease = parent - child;
        if (decrease > best.decrease) {
          const double lo = column_[i].first;
          const double hi = column_[i + 1].first;
          double mid = lo + (hi - lo) / 2;
          if (!(mid < hi)) mid = lo;
          best = {static_cast<int>(f), mid, decrease};
        }
      }
    }
    if (best.feature >= 0) best.decrease = std::max(best.decrease, 0.0);
    return best;
  }

  const Samples& data_;
  const ForestConfig& config_;
  std::size_t mtry_;
  Rng rng_;
  Tree tree_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, bool>> column_;
};

}  // namespace detail

/// Trains trees in parallel (up to `jobs` threads). Tree t draws from
/// derive_seed(config.seed, t) so the result is independent of scheduling.
/// Rows are first put into a canonical order (lexicographic by features,
/// then label) so the forest does not depend on input row order.
inline ForestModel train_forest(const Samples& data, const ForestConfig& config = {},
                                unsigned jobs = 1) {
  if (data.size() == 0) throw Error(ErrorKind::DatasetTooSmall, "no training rows");
  if (config.n_trees < 1) throw Error(ErrorKind::Config, "forest needs at least one tree");
  ForestModel forest;
  forest.config = config;
  forest.n_features = data.dims();
  const std::size_t d = data.dims();
  const std::size_t mtry =
      config.features_per_split > 0
          ? std::min<std::size_t>(static_cast<std::size_t>(config.features_per_split), d)
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<std::size_t> canonical(data.size());
  std::iota(canonical.begin(), canonical.end(), 0);
  std::sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = data.x.row(a);
    const auto rb = data.x.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return data.y[a] < data.y[b];
  });

  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(forest.trees.size(), jobs, [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows;
    if (config.bootstrap) {
      Rng rng(derive_seed(seed, "bootstrap"));
      rows.resize(canonical.size());
      for (auto& r : rows) r = canonical[rng.below(canonical.size())];
    } else {
      rows = canonical;
    }
    detail::TreeBuilder builder(data, config, mtry, derive_seed(seed, "split"));
    forest.trees[t] = builder.build(std::move(rows));
  });
  return forest;
}

/// Majority vote; score is the Up vote fraction and a tied vote is Down.
inline Prediction predict(const ForestModel& m, std::span<const double> x) {
  if (x.size() != m.dims())
    throw Error(ErrorKind::DimensionMismatch, "model has " + std::to_string(m.dims()) +
                                                  " features, row has " + std::to_string(x.size()));
  std::size_t up = 0;
  for (const auto& tree : m.trees) up += tree.vote(x) == Direction::Up;
  const double score = static_cast<double>(up) / static_cast<double>(m.trees.size());
  return {2 * up > m.trees.size() ? Direction::Up : Direction::Down, score};
}

// ---------------------------------------------------------------------------
// Feature importance

struct Importance {
  std::vector<double> values;  // non-negative, sums to 1
  bool uniform_fallback = false;  // every raw importance was zero
};

namespace detail {

inline Importance normalized_or_uniform(std::vector<double> raw) {
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  Importance out;
  if (!(total > 0)) {
    out.values.assign(raw.size(), raw.empty() ? 0.0 : 1.0 / static_cast<double>(raw.size()));
    out.uniform_fallback = true;
    return out;
  }
  for (double& v : raw) v /= total;
  out.values = std::move(raw);
  return out;
}

}  // namespace detail

/// |w_i| / sum |w_j| (on standardized features).
inline Importance feature_importance(const LinearModel& m) {
  std::vector<double> raw;
  for (double w : m.weights) raw.push_back(std::abs(w));
  return detail::normalized_or_uniform(std::move(raw));
}

/// Mean decrease in Gini impurity: normalized per tree, averaged, renormalized.
inline Importance feature_importance(const ForestModel& m) {
  std::vector<double> acc(m.n_features, 0.0);
  for (const auto& tree : m.trees) {
    const double total = std::accumulate(tree.importance.begin(), tree.importance.end(), 0.0);
    if (!(total > 0)) continue;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += tree.importance[i] / total;
  }
  return detail::normalized_or_uniform(std::move(acc));
}

// ---------------------------------------------------------------------------
// Any-model wrapper

struct ModelConfig {
  LogisticConfig logistic;
  SvmConfig svm;
  ForestConfig forest;
};

using Model = std::variant<LinearModel, ForestModel>;

inline ModelKind kind_of(const Model& m) {
  if (const auto* lin = std::get_if<LinearModel>(&m)) return lin->kind;
  return ModelKind::Forest;
}

inline Model train_model(ModelKind kind, const Samples& data, const ModelConfig& config,
                         unsigned jobs = 1) {
  switch (kind) {
    case ModelKind::Logistic: return train_logistic(data, config.logistic);
    case ModelKind::Svm: return train_svm(data, config.svm);
    case ModelKind::Forest: return train_forest(data, config.forest, jobs);
  }
  throw Error(ErrorKind::Config, "unknown model kind");
}

inline Prediction predict(const Model& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return predict(model, x); }, m);
}

inline std::vector<Direction> predict_all(const Model& m, const Samples& data) {
  std::vector<Direction> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(predict(m, data.x.row(i)).label);
  return out;
}

inline Importance feature_importance(const Model& m) {
  return std::visit([](const auto& model) { return feature_importance(model); }, m);
}

// ---------------------------------------------------------------------------
// Serialization: {"format": "liqlab-model", "version": 1, ...}

inline nlohmann::json to_json(const LogisticConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"l2", c.l2},
          {"init_scale", c.init_scale},       {"seed", c.seed}};
}

inline nlohmann::json to_json(const SvmConfig& c) {
  return {{"lambda", c.lambda}, {"epochs", c.epochs}, {"seed", c.seed}};
}

inline nlohmann::json to_json(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"min_samples_leaf", c.min_samples_leaf},
          {"features_per_split", c.features_per_split},
          {"bootstrap", c.bootstrap},
          {"seed", c.seed}};
}

/// `features` names the model's input columns; `standardization_hash` ties
/// the model to the scaling it was trained under.
inline nlohmann::json model_to_json(const Model& model, const std::vector<std::string>& features,
                                    const std::string& standardization_hash) {
  nlohmann::json j{{"format", "liqlab-model"},
                   {"version", 1},
                   {"kind", cli_name(kind_of(model))},
                   {"features", features},
                   {"standardization_hash", standardization_hash}};
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    j["config"] = lin->kind == ModelKind::Logistic ? to_json(lin->logistic) : to_json(lin->svm);
    j["seed"] = lin->kind == ModelKind::Logistic ? lin->logistic.seed : lin->svm.seed;
    j["weights"] = lin->weights;
    j["bias"] = lin->bias;
    if (lin->kind == ModelKind::Svm) j["margin_range"] = {lin->margin_min, lin->margin_max};
  } else {
    const auto& forest = std::get<ForestModel>(model);
    j["config"] = to_json(forest.config);
    j["seed"] = forest.config.seed;
    j["n_features"] = forest.n_features;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : forest.trees)
      trees.push_back({{"feature", t.feature},
                       {"threshold", t.threshold},
                       {"left", t.left},
                       {"right", t.right},
                       {"up", t.up},
                       {"down", t.down},
                       {"importance", t.importance}});
  }
  return j;
}

struct LoadedModel {
  Model model;
  std::vector<std::string> features;
  std::string standardization_hash;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "liqlab-model" || j.value("version", 0) != 1)
    throw Error(ErrorKind::Format, "not a version-1 liqlab model");
  try {
    LoadedModel out;
    out.features = j.at("features").get<std::vector<std::string>>();
    out.standardization_hash = j.at("standardization_hash").get<std::string>();
    const ModelKind kind = model_kind_from_cli(j.at("kind").get<std::string>());
    const auto& c = j.at("config");
    if (kind == ModelKind::Forest) {
      ForestModel f;
      f.config = {c.at("n_trees"), c.at("max_depth"), c.at("min_samples_leaf"),
                  c.at("features_per_split"), c.at("bootstrap"), c.at("seed")};
      f.n_features = j.at("n_features");
      for (const auto& t : j.at("trees")) {
        Tree tree;
        tree.feature = t.at("feature").get<std::vector<int>>();
        tree.threshold = t.at("threshold").get<std::vector<double>>();
        tree.left = t.at("left").get<std::vector<int>>();
        tree.right = t.at("right").get<std::vector<int>>();
        tree.up = t.at("up").get<std::vector<int>>();
        tree.down = t.at("down").get<std::vector<int>>();
        tree.importance = t.at("importance").get<std::vector<double>>();
        f.trees.push_back(std::move(tree));
      }
      out.model = std::move(f);
    } else {
      LinearModel m;
      m.kind = kind;
      if (kind == ModelKind::Logistic)
        m.logistic = {c.at("learning_rate"), c.at("epochs"), c.at("l2"), c.at("init_scale"),
                      c.at("seed")};
      else
        m.svm = {c.at("lambda"), c.at("epochs"), c.at("seed")};
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias");
      if (kind == ModelKind::Svm) {
        m.margin_min = j.at("margin_range").at(0);
        m.margin_max = j.at("margin_range").at(1);
      }
      out.model = std::move(m);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("bad model document: ") + e.what());
  }
}

}  // namespace liqlab
