#pragma once

// Test-only oracles. These recompute results straight from raw inputs with
// independent code (long double, std::map scans) and share nothing with the
// library's computation paths beyond the data types.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "liqlab/dataset.hpp"
#include "liqlab/liquidity.hpp"
#include "liqlab/rng.hpp"
#include "liqlab/tickdata.hpp"

namespace oracle {

using liqlab::kMetricCount;
using liqlab::TickRecord;

struct MetricValue {
  long double value = 0;
  bool valid = false;
};

using Metrics = std::array<MetricValue, kMetricCount>;

struct MinuteStats {
  bool has_trade = false;
  std::int64_t first_time = 0;
  long double first_price = 0, first_size = 0;
  long double bid = 0, ask = 0, bid_size = 0, ask_size = 0;
  long double quotes = 0;
};

// Per-minute raw aggregation of a single-ticker tick list.
inline std::map<std::int64_t, MinuteStats> minute_stats(const std::vector<TickRecord>& ticks) {
  std::map<std::int64_t, MinuteStats> out;
  for (const auto& t : ticks) {
    const std::int64_t minute = t.timestamp / 60'000'000'000LL;
    auto& m = out[minute];
    if (t.is_trade()) {
      if (!m.has_trade || t.timestamp < m.first_time) {
        m.has_trade = true;
        m.first_time = t.timestamp;
        m.first_price = t.trade_price;
        m.first_size = t.trade_size;
      }
    } else {
      m.quotes += 1;
      m.bid += t.bid_price;
      m.ask += t.ask_price;
      m.bid_size += t.bid_size;
      m.ask_size += t.ask_size;
    }
  }
  return out;
}

// All 17 metrics for minute `cur` given the previous emitted minute (or null).
inline Metrics metrics(const MinuteStats& cur, const MinuteStats* prev) {
  const long double A = cur.ask / cur.quotes, B = cur.bid / cur.quotes;
  const long double Qa = cur.ask_size / cur.quotes, Qb = cur.bid_size / cur.quotes;
  const long double P = cur.first_price, v = cur.first_size;
  const long double M = (A + B) / 2;
  Metrics m;
  auto put = [&](liqlab::Metric k, long double value, bool ok = true) {
    m[liqlab::index_of(k)] = {ok ? value : 0.0L, ok};
  };
  using liqlab::Metric;
  const long double turnover = P * v;
  const long double log_depth = std::log(Qa) + std::log(Qb);
  const long double dollar_depth = (Qa * A + Qb * B) / 2;
  put(Metric::Turnover, turnover);
  put(Metric::Depth, (Qa + Qb) / 2);
  put(Metric::LogDepth, log_depth);
  put(Metric::DollarDepth, dollar_depth);
  put(Metric::Spread, A - B);
  put(Metric::EffectiveSpread, 2 * std::fabs(P - M));
  put(Metric::RelSpreadMid, (A - B) / M);
  put(Metric::RelSpreadLog, std::log(A / B));
  put(Metric::RelEffectiveSpread, 2 * std::fabs(P - M) / P);
  const bool slopes = log_depth != 0;
  put(Metric::QuoteSlope, slopes ? (A - B) / log_depth : 0, slopes);
  put(Metric::LogQuoteSlope, slopes ? std::log(A / B) / log_depth : 0, slopes);
  put(Metric::AdjLogQuoteSlope,
      slopes ? std::log(A / B) / log_depth * (1 + std::fabs(std::log(Qb / Qa))) : 0, slopes);
  put(Metric::CompositeLiquidity, ((A - B) / M) / dollar_depth);
  put(Metric::OrderRatio, std::fabs(Qb - Qa) / turnover);
  if (prev) {
    const long double r = std::fabs(std::log(P / prev->first_price));
    const long double dt = static_cast<long double>(cur.first_time - prev->first_time) / 1e9L;
    put(Metric::AmivestRatio, r != 0 ? turnover / r : 0, r != 0);
    put(Metric::AmihudIlliq, r / turnover);
    put(Metric::FlowRatio, turnover / dt);
  } else {
    put(Metric::AmivestRatio, 0, false);
    put(Metric::AmihudIlliq, 0, false);
    put(Metric::FlowRatio, 0, false);
  }
  return m;
}

// Relative tolerance with an absolute floor for quantities that are
// differences of nearly equal prices (exact zero vs. 1e-16 residue).
inline bool close(long double expected, double actual, double rel) {
  const long double diff = std::fabs(expected - static_cast<long double>(actual));
  const long double scale = std::max(std::fabs(expected), std::fabs(static_cast<long double>(actual)));
  return diff <= rel * scale || diff <= 1e-12L;
}

// Two consecutive minutes of random raw ticks for one ticker. Prices are on
// a cent grid; some quotes are locked; some pairs repeat the first-trade
// price to exercise the zero-return guard.
inline std::vector<TickRecord> random_minute_pair(liqlab::Rng& rng, std::int64_t minute0) {
  std::vector<TickRecord> out;
  const double level = std::round(rng.uniform(5.0, 500.0) * 100) / 100;
  double first_prices[2];
  first_prices[0] = level;
  first_prices[1] = rng.bernoulli(0.1) ? level : std::round(level * rng.uniform(0.98, 1.02) * 100) / 100;
  if (first_prices[1] <= 0) first_prices[1] = 0.01;
  for (int k = 0; k < 2; ++k) {
    const std::int64_t base = (minute0 + k) * 60'000'000'000LL;
    std::vector<TickRecord> minute;
    const int trades = 1 + static_cast<int>(rng.below(5));
    const int quotes = 1 + static_cast<int>(rng.below(20));
    std::int64_t first_t = base + static_cast<std::int64_t>(rng.below(30'000'000'000ULL));
    minute.push_back(TickRecord::trade(first_t, "ORCL", first_prices[k],
                                       static_cast<double>(1 + rng.below(5000))));
    for (int i = 1; i < trades; ++i)
      minute.push_back(TickRecord::trade(
          first_t + 1 + static_cast<std::int64_t>(rng.below(29'000'000'000ULL)), "ORCL",
          std::round(first_prices[k] * rng.uniform(0.99, 1.01) * 100) / 100 + 0.01,
          static_cast<double>(1 + rng.below(5000))));
    for (int i = 0; i < quotes; ++i) {
      const double bid = std::max(0.01, std::round(first_prices[k] * rng.uniform(0.99, 1.0) * 100) / 100);
      const double ask = rng.bernoulli(0.1) ? bid : bid + 0.01 * static_cast<double>(1 + rng.below(20));
      minute.push_back(TickRecord::quote(base + static_cast<std::int64_t>(rng.below(60'000'000'000ULL)),
                                         "ORCL", bid, ask, static_cast<double>(1 + rng.below(3000)),
                                         static_cast<double>(1 + rng.below(3000))));
    }
    std::stable_sort(minute.begin(), minute.end(),
                     [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
    out.insert(out.end(), minute.begin(), minute.end());
  }
  return out;
}

// Central-difference gradient check. `objective(w, b)` and `gradient(w, b)`
// follow the trainer convention (bias derivative last). Parameter points are
// redrawn while any sample sits within `kink_guard` of a hinge kink, so the
// subgradient is the true gradient there. Returns the worst relative error
// ||fd - g|| / max(||fd||, ||g||) over `points` draws.
template <class Objective, class Gradient>
double worst_gradient_error(const liqlab::Samples& data, Objective objective, Gradient gradient,
                            liqlab::Rng& rng, int points, double h, double kink_guard = 0) {
  const std::size_t d = data.dims();
  double worst = 0;
  for (int p = 0; p < points; ++p) {
    std::vector<double> w(d);
    double b;
    for (;;) {
      for (double& v : w) v = rng.normal(0.0, 0.7);
      b = rng.normal(0.0, 0.5);
      if (kink_guard <= 0) break;
      bool near = false;
      for (std::size_t i = 0; i < data.size() && !near; ++i) {
        const double y = data.y[i] == liqlab::Direction::Up ? 1.0 : -1.0;
        double z = b;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * data.x(i, j);
        near = std::fabs(y * z - 1.0) < kink_guard;
      }
      if (!near) break;
    }
    const std::vector<double> g = gradient(w, b);
    long double diff2 = 0, g2 = 0, fd2 = 0;
    for (std::size_t k = 0; k <= d; ++k) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (k < d) {
        wp[k] += h;
        wm[k] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const long double fd = (static_cast<long double>(objective(wp, bp)) - objective(wm, bm)) / (2 * h);
      diff2 += (fd - g[k]) * (fd - g[k]);
      g2 += static_cast<long double>(g[k]) * g[k];
      fd2 += fd * fd;
    }
    const long double scale = std::sqrt(std::max(g2, fd2));
    worst = std::max(worst, static_cast<double>(std::sqrt(diff2) / std::max(scale, 1e-300L)));
  }
  return worst;
}

}  // namespace oracle
