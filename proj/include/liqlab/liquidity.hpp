#pragma once

// Liquidity metrics computed from a minute bucket (and, for the
// return-dependent ones, the previous emitted bucket of the same ticker-day).
//
// Notation: P = first trade price, v = first trade size, A/B = mean ask/bid
// price, Qa/Qb = mean ask/bid size, M = (A + B) / 2, r = ln(P / P_prev).
//
//   turnover             P * v
//   depth                (Qa + Qb) / 2
//   log_depth            ln Qa + ln Qb
//   dollar_depth         (Qa * A + Qb * B) / 2
//   spread               A - B
//   effective_spread     2 |P - M|
//   rel_spread_mid       (A - B) / M
//   rel_spread_log       ln(A / B)
//   rel_effective_spread 2 |P - M| / P
//   quote_slope          (A - B) / log_depth
//   log_quote_slope      ln(A / B) / log_depth
//   adj_log_quote_slope  log_quote_slope * (1 + |ln(Qb / Qa)|)
//   composite_liquidity  rel_spread_mid / dollar_depth
//   amivest_ratio        turnover / |r|
//   flow_ratio           turnover / seconds between the two first trades
//   order_ratio          |Qb - Qa| / turnover
//   amihud_illiq         |r| / turnover
//
// A metric whose guard fires, or whose value is not finite, is stored as 0
// with its valid flag cleared.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>

#include "liqlab/sampler.hpp"

namespace liqlab {

enum class Metric : std::size_t {
  Turnover,
  Depth,
  LogDepth,
  DollarDepth,
  Spread,
  EffectiveSpread,
  RelSpreadMid,
  RelSpreadLog,
  RelEffectiveSpread,
  QuoteSlope,
  LogQuoteSlope,
  AdjLogQuoteSlope,
  CompositeLiquidity,
  AmivestRatio,
  FlowRatio,
  OrderRatio,
  AmihudIlliq,
};

inline constexpr std::size_t kMetricCount = 17;

inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "turnover",         "depth",           "log_depth",           "dollar_depth",
    "spread",           "effective_spread", "rel_spread_mid",     "rel_spread_log",
    "rel_effective_spread", "quote_slope", "log_quote_slope",     "adj_log_quote_slope",
    "composite_liquidity", "amivest_ratio", "flow_ratio",         "order_ratio",
    "amihud_illiq",
};

constexpr std::size_t index_of(Metric m) { return static_cast<std::size_t>(m); }
constexpr std::string_view name_of(Metric m) { return kMetricNames[index_of(m)]; }

inline std::optional<Metric> metric_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMetricCount; ++i)
    if (kMetricNames[i] == name) return static_cast<Metric>(i);
  return std::nullopt;
}

struct FeatureVector {
  std::array<double, kMetricCount> values{};
  std::array<bool, kMetricCount> valid{};

  double operator[](Metric m) const { return values[index_of(m)]; }
  bool is_valid(Metric m) const { return valid[index_of(m)]; }

  void set(Metric m, double v, bool ok = true) {
    ok = ok && std::isfinite(v);
    values[index_of(m)] = ok ? v : 0.0;
    valid[index_of(m)] = ok;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (bool v : valid) n += v;
    return n;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct SpreadMetrics {
  double spread, effective_spread, rel_spread_mid, rel_spread_log, rel_effective_spread;
};

struct DepthMetrics {
  double depth, log_depth, dollar_depth;
};

struct SlopeMetrics {
  double quote_slope, log_quote_slope, adj_log_quote_slope, composite_liquidity;
  bool slopes_valid;  // false when log_depth == 0
};

struct ActivityMetrics {
  double turnover, amivest_ratio, flow_ratio, order_ratio, amihud_illiq;
  bool has_previous;  // gates amivest, amihud, flow
  bool nonzero_return;  // gates amivest
};

inline double mid_price(const MinuteBucket& b) { return (b.avg_ask_price + b.avg_bid_price) / 2; }

inline SpreadMetrics spread_metrics(const MinuteBucket& b) {
  const double a = b.avg_ask_price;
  const double bid = b.avg_bid_price;
  const double p = b.first_trade_price;
  const double mid = mid_price(b);
  const double eff = 2 * std::abs(p - mid);
  return {a - bid, eff, (a - bid) / mid, std::log(a / bid), eff / p};
}

inline DepthMetrics depth_metrics(const MinuteBucket& b) {
  const double qa = b.avg_ask_size;
  const double qb = b.avg_bid_size;
  return {(qa + qb) / 2, std::log(qa) + std::log(qb),
          (qa * b.avg_ask_price + qb * b.avg_bid_price) / 2};
}

inline SlopeMetrics slope_metrics(const MinuteBucket& b) {
  const SpreadMetrics s = spread_metrics(b);
  const DepthMetrics d = depth_metrics(b);
  SlopeMetrics out{};
  out.slopes_valid = d.log_depth != 0.0;
  if (out.slopes_valid) {
    out.quote_slope = s.spread / d.log_depth;
    out.log_quote_slope = s.rel_spread_log / d.log_depth;
    out.adj_log_quote_slope =
        out.log_quote_slope * (1 + std::abs(std::log(b.avg_bid_size / b.avg_ask_size)));
  }
  out.composite_liquidity = s.rel_spread_mid / d.dollar_depth;
  return out;
}

inline ActivityMetrics activity_metrics(const MinuteBucket& b, const MinuteBucket* previous) {
  ActivityMetrics out{};
  out.turnover = b.first_trade_price * b.first_trade_size;
  out.order_ratio = std::abs(b.avg_bid_size - b.avg_ask_size) / out.turnover;
  out.has_previous = previous != nullptr;
  if (previous != nullptr) {
    const double abs_r = std::abs(std::log(b.first_trade_price / previous->first_trade_price));
    const double dt = static_cast<double>(b.first_trade_time - previous->first_trade_time) /
                      static_cast<double>(kNanosPerSecond);
    out.nonzero_return = abs_r != 0.0;
    out.amihud_illiq = abs_r / out.turnover;
    if (out.nonzero_return) out.amivest_ratio = out.turnover / abs_r;
    out.flow_ratio = out.turnover / dt;
  }
  return out;
}

/// All metrics for bucket `b`; `previous` is the prior emitted bucket of the
/// same ticker-day, or null for the first bucket.
inline FeatureVector compute_feature_vector(const MinuteBucket& b, const MinuteBucket* previous) {
  const SpreadMetrics s = spread_metrics(b);
  const DepthMetrics d = depth_metrics(b);
  const SlopeMetrics q = slope_metrics(b);
  const ActivityMetrics a = activity_metrics(b, previous);

  FeatureVector fv;
  fv.set(Metric::Turnover, a.turnover);
  fv.set(Metric::Depth, d.depth);
  fv.set(Metric::LogDepth, d.log_depth);
  fv.set(Metric::DollarDepth, d.dollar_depth);
  fv.set(Metric::Spread, s.spread);
  fv.set(Metric::EffectiveSpread, s.effective_spread);
  fv.set(Metric::RelSpreadMid, s.rel_spread_mid);
  fv.set(Metric::RelSpreadLog, s.rel_spread_log);
  fv.set(Metric::RelEffectiveSpread, s.rel_effective_spread);
  fv.set(Metric::QuoteSlope, q.quote_slope, q.slopes_valid);
  fv.set(Metric::LogQuoteSlope, q.log_quote_slope, q.slopes_valid);
  fv.set(Metric::AdjLogQuoteSlope, q.adj_log_quote_slope, q.slopes_valid);
  fv.set(Metric::CompositeLiquidity, q.composite_liquidity);
  fv.set(Metric::AmivestRatio, a.amivest_ratio, a.has_previous && a.nonzero_return);
  fv.set(Metric::FlowRatio, a.flow_ratio, a.has_previous);
  fv.set(Metric::OrderRatio, a.order_ratio);
  fv.set(Metric::AmihudIlliq, a.amihud_illiq, a.has_previous);
  return fv;
}

}  // namespace liqlab
