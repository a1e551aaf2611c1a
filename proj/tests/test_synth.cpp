#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "liqlab/liquidity.hpp"
#include "liqlab/synth.hpp"

using namespace liqlab;

namespace {

SynthConfig long_tape(double strength, std::uint64_t seed, SignalProxy proxy = SignalProxy::QuoteImbalance) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.days = 40;
  cfg.signal_strength = strength;
  cfg.signal_proxy = proxy;
  return cfg;
}

}  // namespace

TEST(PathSimulator, NeutralUpFrequency) {
  SynthConfig cfg;
  cfg.signal_strength = 0;
  PathSimulator path(cfg, 123);
  std::size_t up = 0, moves = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const auto plan = path.next();
    if (plan.step_ticks == 0) continue;
    ++moves;
    up += plan.direction > 0;
  }
  const double freq = static_cast<double>(up) / static_cast<double>(moves);
  EXPECT_GE(freq, 0.47);
  EXPECT_LE(freq, 0.53);
  EXPECT_GT(moves, 500'000u);
}

TEST(PathSimulator, StrengthOneFollowsRegime) {
  SynthConfig cfg;
  cfg.signal_strength = 1;
  PathSimulator path(cfg, 5);
  for (int i = 0; i < 10000; ++i) {
    const auto plan = path.next();
    EXPECT_EQ(plan.direction, plan.regime);
  }
}

TEST(Generate, TradeCountIsPoisson) {
  SynthConfig cfg;
  cfg.seed = 2024;
  const auto recs = generate(cfg);
  std::size_t trades = 0;
  for (const auto& r : recs) trades += r.is_trade();
  EXPECT_NEAR(static_cast<double>(trades), 1500.0, 3 * std::sqrt(1500.0));
  // mean over several seeds is much tighter
  double total = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    cfg.seed = s;
    for (const auto& r : generate(cfg)) total += r.is_trade();
  }
  EXPECT_NEAR(total / 20, 1500.0, 3 * std::sqrt(1500.0 / 20));
}

TEST(Generate, ByteDeterministicAndJobsInvariant) {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.tickers = {"AAA", "BBB", "CCC"};
  cfg.days = 3;
  cfg.signal_strength = 0.5;
  const std::string a = serialize_tape(generate(cfg, 1));
  EXPECT_EQ(a, serialize_tape(generate(cfg, 1)));
  EXPECT_EQ(a, serialize_tape(generate(cfg, 4)));
  EXPECT_EQ(fnv1a64(a), fnv1a64(serialize_tape(generate(cfg, 9))));
  cfg.seed = 8;
  EXPECT_NE(a, serialize_tape(generate(cfg, 1)));
}

TEST(Generate, PassesIngestAndInvariants) {
  SynthConfig cfg;
  cfg.seed = 31;
  cfg.tickers = {"AAA", "B2"};
  cfg.days = 2;
  cfg.signal_strength = 0.7;
  cfg.signal_proxy = SignalProxy::Spread;
  const auto recs = generate(cfg);
  const auto parsed = parse_tape(serialize_tape(recs));
  EXPECT_EQ(parsed.report.rejected(), 0u);
  EXPECT_EQ(parsed.records, recs);
  std::map<std::string, std::int64_t> last;
  const TimeZone tz = TimeZone::parse(cfg.timezone);
  LocalClock clock(tz);
  for (const auto& r : recs) {
    if (r.is_quote()) {
      EXPECT_GE(r.ask_price, r.bid_price);
      EXPECT_GT(r.bid_price, 0);
    }
    auto [it, fresh] = last.try_emplace(r.ticker, r.timestamp);
    EXPECT_LE(it->second, r.timestamp);
    it->second = r.timestamp;
    EXPECT_TRUE(cfg.session.contains_time_of_day(clock.time_of_day_nanos(r.timestamp)));
  }
  // prices on the tick grid
  for (const auto& r : recs) {
    const double p = r.is_trade() ? r.trade_price : r.bid_price;
    EXPECT_NEAR(p * 100, std::round(p * 100), 1e-6);
  }
}

TEST(Generate, ConfigValidation) {
  SynthConfig cfg;
  cfg.tickers = {"lower"};
  EXPECT_THROW(generate(cfg), Error);
  cfg = {};
  cfg.trade_rate = 0;
  EXPECT_THROW(generate(cfg), Error);
  cfg = {};
  cfg.signal_strength = 1.5;
  EXPECT_THROW(generate(cfg), Error);
  cfg = {};
  cfg.timezone = "Mars/Olympus";
  EXPECT_THROW(generate(cfg), Error);
  cfg = {};
  cfg.days = 0;
  EXPECT_THROW(generate(cfg), Error);
}

TEST(PlantCheck, FullStrength) {
  const auto cfg = long_tape(1.0, 1);
  const auto r = plant_check(cfg, generate(cfg, 4));
  EXPECT_GE(r.pairs, 10'000u);
  EXPECT_EQ(r.probability, 1.0);
}

TEST(PlantCheck, NullSignal) {
  const auto cfg = long_tape(0.0, 2);
  const auto r = plant_check(cfg, generate(cfg, 4));
  EXPECT_GE(r.pairs, 10'000u);
  EXPECT_NEAR(r.probability, 0.5, 0.03);
}

TEST(PlantCheck, PartialStrength) {
  const auto cfg = long_tape(0.6, 3);
  const auto r = plant_check(cfg, generate(cfg, 4));
  EXPECT_GE(r.pairs, 10'000u);
  EXPECT_GE(r.probability, 0.77);
  EXPECT_LE(r.probability, 0.83);
}

TEST(PlantCheck, SpreadProxy) {
  auto cfg = long_tape(1.0, 4, SignalProxy::Spread);
  EXPECT_EQ(plant_check(cfg, generate(cfg, 4)).probability, 1.0);
  cfg.signal_strength = 0.6;
  const auto r = plant_check(cfg, generate(cfg, 4));
  EXPECT_NEAR(r.probability, 0.8, 0.03);
}

TEST(PlantCheck, InsufficientSample) {
  SynthConfig cfg;
  cfg.signal_strength = 0.5;
  const auto tape = generate(cfg);
  try {
    plant_check(cfg, tape);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientSample);
  }
  EXPECT_GT(plant_check(cfg, tape, 100).pairs, 100u);
}

TEST(SynthConfig, PlantedFeatureNames) {
  for (auto p : {SignalProxy::QuoteImbalance, SignalProxy::Spread}) {
    EXPECT_EQ(signal_proxy_from_string(to_string(p)), p);
    for (const auto& name : planted_features(p)) EXPECT_TRUE(metric_from_name(name).has_value());
  }
  EXPECT_THROW(signal_proxy_from_string("depth"), Error);
  EXPECT_EQ(SynthConfig{}.to_json()["start_date"], "2024-08-05");
}
