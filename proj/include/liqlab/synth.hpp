#pragma once

// Seedable synthetic tick tapes.
//
// Each (ticker, day) stream is generated from two mt19937_64 streams derived
// from the master seed: a "path" stream that fixes, minute by minute, the
// liquidity regime and the next price move, and a "ticks" stream that draws
// arrival times, sizes and spreads. Per minute m:
//
//   regime z in {+1, -1} with probability 1/2 each
//   direction d = z with probability (1 + s) / 2, else -z   (s = signal_strength)
//   step k = round(|N(0,1)| * volatility * P_m / tick) ticks  (k = 0 gives a tie)
//   P_{m+1} = P_m + d * k * tick
//
// The first trade of minute m prints at P_m. Quotes straddle P_m. The regime
// drives the planted proxy:
//   quote_imbalance: z = +1 quotes carry a bid/ask size ratio in
//                    [F, 1.25 F] (F = imbalance_factor), z = -1 in [1, 1.25];
//                    the product bid_size * ask_size is preserved so depth
//                    in logs carries no signal.
//   spread:          z = +1 multiplies both half-spreads by spread_factor.
// With s = 0 the direction is independent of everything observable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "liqlab/error.hpp"
#include "liqlab/parallel.hpp"
#include "liqlab/rng.hpp"
#include "liqlab/tickdata.hpp"
#include "liqlab/timezone.hpp"

namespace liqlab {

enum class SignalProxy { QuoteImbalance, Spread };

inline std::string_view to_string(SignalProxy p) {
  return p == SignalProxy::QuoteImbalance ? "quote_imbalance" : "spread";
}

inline SignalProxy signal_proxy_from_string(std::string_view s) {
  if (s == "quote_imbalance") return SignalProxy::QuoteImbalance;
  if (s == "spread") return SignalProxy::Spread;
  throw Error(ErrorKind::Config, "unknown signal proxy '" + std::string(s) +
                                     "' (quote_imbalance|spread)");
}

/// Metrics whose values the proxy drives by construction.
inline std::vector<std::string> planted_features(SignalProxy p) {
  if (p == SignalProxy::QuoteImbalance) return {"order_ratio", "adj_log_quote_slope"};
  return {"spread", "rel_spread_mid", "rel_spread_log", "quote_slope", "log_quote_slope"};
}

struct SynthConfig {
  std::uint64_t seed = 7;
  std::vector<std::string> tickers{"SYNA"};
  int days = 1;
  std::int64_t start_day = 19940;  // 2024-08-05
  std::string timezone = "America/New_York";
  SessionWindow session;
  double trade_rate = 5.0;   // trades per minute (Poisson)
  double quote_rate = 10.0;  // quotes per minute (Poisson)
  double start_price = 100.0;
  double volatility = 0.0005;  // per-minute log-price step sd
  int ticks_per_unit = 100;    // price grid 1/ticks_per_unit (0.01)
  int half_spread_mean = 2;    // ticks
  int half_spread_jitter = 1;  // half-spread uniform in mean +/- jitter ticks
  double size_mu = 5.7;        // ln shares of quote sizes
  double size_sigma = 0.5;
  double signal_strength = 0.0;
  SignalProxy signal_proxy = SignalProxy::QuoteImbalance;
  double imbalance_factor = 4.0;
  int spread_factor = 4;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, "synth: " + what); };
    if (tickers.empty()) fail("need at least one ticker");
    for (const auto& t : tickers)
      if (!detail::valid_ticker(t)) fail("ticker '" + t + "' must be uppercase alphanumeric");
    if (days < 1) fail("days must be >= 1");
    if (!(trade_rate > 0) || !(quote_rate > 0)) fail("arrival rates must be > 0");
    if (!(volatility >= 0)) fail("volatility must be >= 0");
    if (ticks_per_unit < 1) fail("ticks_per_unit must be >= 1");
    if (half_spread_jitter < 0 || half_spread_mean - half_spread_jitter < 1)
      fail("half spread must stay >= 1 tick");
    if (!(signal_strength >= 0 && signal_strength <= 1)) fail("signal_strength must be in [0, 1]");
    if (!(imbalance_factor >= 2)) fail("imbalance_factor must be >= 2");
    if (spread_factor * (half_spread_mean - half_spread_jitter) <=
        half_spread_mean + half_spread_jitter)
      fail("spread_factor too small to separate spread regimes");
    if (!(size_sigma >= 0)) fail("size_sigma must be >= 0");
    if (start_price * ticks_per_unit < 10.0 * max_half_spread_ticks())
      fail("start_price too small for the spread configuration");
    (void)TimeZone::parse(timezone);
  }

  int max_half_spread_ticks() const {
    return (half_spread_mean + half_spread_jitter) * std::max(1, spread_factor);
  }

  /// Imbalance ratio threshold halfway (geometrically) between the regimes.
  double imbalance_threshold() const { return std::sqrt(1.25 * imbalance_factor); }

  /// Mean-spread threshold in ticks between the narrow and wide regimes.
  double spread_threshold_ticks() const {
    return (2.0 * (half_spread_mean + half_spread_jitter) +
            2.0 * spread_factor * (half_spread_mean - half_spread_jitter)) /
           2.0;
  }

  nlohmann::json to_json() const {
    return {{"seed", seed},
            {"tickers", tickers},
            {"days", days},
            {"start_date", format_date(start_day)},
            {"timezone", timezone},
            {"session_start", format_time_of_day(session.start_seconds)},
            {"session_end", format_time_of_day(session.end_seconds)},
            {"trade_rate", trade_rate},
            {"quote_rate", quote_rate},
            {"start_price", start_price},
            {"volatility", volatility},
            {"ticks_per_unit", ticks_per_unit},
            {"half_spread_mean", half_spread_mean},
            {"half_spread_jitter", half_spread_jitter},
            {"size_mu", size_mu},
            {"size_sigma", size_sigma},
            {"signal_strength", signal_strength},
            {"signal_proxy", to_string(signal_proxy)},
            {"imbalance_factor", imbalance_factor},
            {"spread_factor", spread_factor}};
  }
};

/// One minute of the latent path.
struct MinutePlan {
  int regime = 1;       // z
  bool bid_heavy = true;  // which side the size imbalance favors
  int direction = 1;    // d
  std::int64_t step_ticks = 0;
  std::int64_t price_ticks = 0;  // P_m in ticks
};

class PathSimulator {
public:
  PathSimulator(const SynthConfig& config, std::uint64_t seed)
      : config_(config),
        rng_(seed),
        price_ticks_(std::llround(config.start_price * config.ticks_per_unit)),
        floor_ticks_(4 * config.max_half_spread_ticks()) {}

  MinutePlan next() {
    MinutePlan plan;
    plan.regime = rng_.bernoulli(0.5) ? 1 : -1;
    plan.bid_heavy = rng_.bernoulli(0.5);
    plan.direction = rng_.uniform() < (1.0 + config_.signal_strength) / 2 ? plan.regime
                                                                           : -plan.regime;
    const double price = static_cast<double>(price_ticks_) / config_.ticks_per_unit;
    plan.step_ticks = std::llround(std::abs(rng_.normal()) * config_.volatility * price *
                                   config_.ticks_per_unit);
    plan.price_ticks = price_ticks_;
    price_ticks_ += plan.direction * plan.step_ticks;
    if (price_ticks_ < floor_ticks_) price_ticks_ = floor_ticks_;
    return plan;
  }

private:
  const SynthConfig& config_;
  Rng rng_;
  std::int64_t price_ticks_;
  std::int64_t floor_ticks_;
};

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t master, const std::string& ticker, int day,
                                 std::string_view purpose) {
  return derive_seed(derive_seed(derive_seed(master, ticker), static_cast<std::uint64_t>(day)),
                     purpose);
}

// Arrival offsets (ns) of a Poisson process over one minute.
inline void arrivals(Rng& rng, double per_minute, std::vector<std::int64_t>& out) {
  out.clear();
  double t = 0;
  for (;;) {
    t += rng.exponential(per_minute / 60.0);
    if (t >= 60.0) return;
    out.push_back(std::min<std::int64_t>(static_cast<std::int64_t>(t * 1e9), kNanosPerMinute - 1));
  }
}

inline double whole_shares(double x) { return std::max(1.0, std::round(x)); }

}  // namespace detail

/// Records for one (ticker, day), time-sorted.
inline std::vector<TickRecord> generate_stream(const SynthConfig& config, const TimeZone& tz,
                                               const std::string& ticker, int day) {
  PathSimulator path(config, detail::stream_seed(config.seed, ticker, day, "path"));
  Rng rng(detail::stream_seed(config.seed, ticker, day, "ticks"));
  const double unit = config.ticks_per_unit;
  const std::int64_t local_day = config.start_day + day;
  std::vector<TickRecord> out;
  std::vector<std::int64_t> trade_times, quote_times;
  const std::int64_t minutes = config.session.minutes();
  for (std::int64_t m = 0; m < minutes; ++m) {
    const MinutePlan plan = path.next();
    const std::int64_t minute_utc =
        tz.local_to_utc(local_day * kSecondsPerDay + config.session.start_seconds + 60 * m) *
        kNanosPerSecond;
    detail::arrivals(rng, config.trade_rate, trade_times);
    detail::arrivals(rng, config.quote_rate, quote_times);
    const std::size_t first = out.size();

    for (std::size_t i = 0; i < trade_times.size(); ++i) {
      std::int64_t ticks = plan.price_ticks;
      if (i > 0) ticks = std::max<std::int64_t>(1, ticks + static_cast<std::int64_t>(rng.below(3)) - 1);
      const double size = detail::whole_shares(rng.lognormal(config.size_mu - 1.0, config.size_sigma));
      out.push_back(TickRecord::trade(minute_utc + trade_times[i], ticker,
                                      static_cast<double>(ticks) / unit, size));
    }

    const int lo = config.half_spread_mean - config.half_spread_jitter;
    const auto span = static_cast<std::uint64_t>(2 * config.half_spread_jitter + 1);
    const bool wide = config.signal_proxy == SignalProxy::Spread && plan.regime > 0;
    const bool imbalanced = config.signal_proxy == SignalProxy::QuoteImbalance && plan.regime > 0;
    for (std::int64_t t : quote_times) {
      std::int64_t hb = lo + static_cast<std::int64_t>(rng.below(span));
      std::int64_t ha = lo + static_cast<std::int64_t>(rng.below(span));
      if (wide) {
        hb *= config.spread_factor;
        ha *= config.spread_factor;
      }
      const double base = rng.lognormal(config.size_mu, config.size_sigma);
      const double ratio = imbalanced ? rng.uniform(config.imbalance_factor,
                                                    1.25 * config.imbalance_factor)
                                      : rng.uniform(1.0, 1.25);
      const double heavy = detail::whole_shares(base * std::sqrt(ratio));
      const double light = detail::whole_shares(base / std::sqrt(ratio));
      out.push_back(TickRecord::quote(minute_utc + t, ticker,
                                      static_cast<double>(plan.price_ticks - hb) / unit,
                                      static_cast<double>(plan.price_ticks + ha) / unit,
                                      plan.bid_heavy ? heavy : light,
                                      plan.bid_heavy ? light : heavy));
    }
    std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                     [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
  }
  return out;
}

/// Whole tape: every (ticker, day) stream, merged in timestamp order (ties
/// keep day-major, then ticker order). Streams are generated on up to `jobs`
/// threads; the output does not depend on `jobs`.
inline std::vector<TickRecord> generate(const SynthConfig& config, unsigned jobs = 1) {
  config.validate();
  const TimeZone tz = TimeZone::parse(config.timezone);
  const std::size_t n_tickers = config.tickers.size();
  std::vector<std::vector<TickRecord>> streams(n_tickers * static_cast<std::size_t>(config.days));
  parallel_for(streams.size(), jobs, [&](std::size_t i) {
    streams[i] = generate_stream(config, tz, config.tickers[i % n_tickers],
                                 static_cast<int>(i / n_tickers));
  });
  std::vector<TickRecord> out;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  out.reserve(total);
  for (auto& s : streams) std::move(s.begin(), s.end(), std::back_inserter(out));
  std::stable_sort(out.begin(), out.end(),
                   [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

struct PlantCheck {
  double probability = 0.0;  // P(direction == proxy sign)
  std::size_t pairs = 0;     // non-tie consecutive-minute pairs examined
};

/// Re-derives the planted proxy for every minute of a tape and measures how
/// often the next minute's first-trade move agrees with it. Only pairs of
/// consecutive calendar minutes that both have a trade (and quotes in the
/// first) are used; ties are skipped.
inline PlantCheck plant_check(const SynthConfig& config, std::span<const TickRecord> tape,
                              std::size_t min_pairs = 10'000) {
  const TimeZone tz = TimeZone::parse(config.timezone);
  struct Minute {
    std::int64_t first_trade_time = INT64_MAX;
    double first_trade_price = 0;
    double bid_size = 0, ask_size = 0, spread = 0;
    std::int64_t quotes = 0;
  };
  std::map<std::tuple<std::string, std::int64_t>, Minute> minutes;  // (ticker, minute)
  LocalClock clock(tz);
  for (const auto& r : tape) {
    if (!config.session.contains_time_of_day(clock.time_of_day_nanos(r.timestamp))) continue;
    const std::int64_t minute = floor_div(r.timestamp, kNanosPerMinute);
    Minute& m = minutes[{r.ticker, minute}];
    if (r.is_trade()) {
      if (r.timestamp < m.first_trade_time) {
        m.first_trade_time = r.timestamp;
        m.first_trade_price = r.trade_price;
      }
    } else {
      ++m.quotes;
      m.bid_size += r.bid_size;
      m.ask_size += r.ask_size;
      m.spread += r.ask_price - r.bid_price;
    }
  }
  std::size_t agree = 0, pairs = 0;
  for (auto it = minutes.begin(); it != minutes.end(); ++it) {
    const auto next = std::next(it);
    if (next == minutes.end()) break;
    if (std::get<0>(next->first) != std::get<0>(it->first) ||
        std::get<1>(next->first) != std::get<1>(it->first) + 1)
      continue;
    const Minute& a = it->second;
    const Minute& b = next->second;
    if (a.quotes == 0 || a.first_trade_time == INT64_MAX || b.first_trade_time == INT64_MAX)
      continue;
    if (b.first_trade_price == a.first_trade_price) continue;
    int proxy;
    if (config.signal_proxy == SignalProxy::QuoteImbalance) {
      const double ratio = std::max(a.bid_size, a.ask_size) / std::min(a.bid_size, a.ask_size);
      proxy = ratio >= config.imbalance_threshold() ? 1 : -1;
    } else {
      const double mean_spread_ticks = a.spread / static_cast<double>(a.quotes) * config.ticks_per_unit;
      proxy = mean_spread_ticks >= config.spread_threshold_ticks() ? 1 : -1;
    }
    const int direction = b.first_trade_price > a.first_trade_price ? 1 : -1;
    agree += direction == proxy;
    ++pairs;
  }
  if (pairs < min_pairs)
    throw Error(ErrorKind::InsufficientSample, std::to_string(pairs) + " minute pairs, need " +
                                                   std::to_string(min_pairs));
  return {static_cast<double>(agree) / static_cast<double>(pairs), pairs};
}

}  // namespace liqlab
