#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "liqlab/synth.hpp"
#include "liqlab/tickdata.hpp"

using namespace liqlab;

namespace {

constexpr std::int64_t kDay = 19940;  // 2024-08-05, EDT (UTC-4)
constexpr std::int64_t kEdt = -4 * 3600;

std::int64_t local_ns(std::int64_t day, std::int64_t seconds_of_day, std::int64_t offset) {
  return (day * kSecondsPerDay + seconds_of_day - offset) * kNanosPerSecond;
}

std::string tape(std::initializer_list<std::string_view> rows) {
  std::string s(kTapeHeader);
  for (auto r : rows) {
    s += '\n';
    s += r;
  }
  s += '\n';
  return s;
}

}  // namespace

TEST(ParseTape, TradeRowMapsFields) {
  const auto parsed = parse_tape(tape({"1722855600000000000,IBM,T,185.30,200,,,,"}));
  ASSERT_EQ(parsed.records.size(), 1u);
  const auto& r = parsed.records[0];
  EXPECT_EQ(r.timestamp, 1722855600000000000);
  EXPECT_EQ(r.ticker, "IBM");
  EXPECT_TRUE(r.is_trade());
  EXPECT_DOUBLE_EQ(r.trade_price, 185.30);
  EXPECT_DOUBLE_EQ(r.trade_size, 200);
  EXPECT_EQ(parsed.report.accepted, 1u);
  EXPECT_EQ(parsed.report.rejected(), 0u);
}

TEST(ParseTape, QuoteRowMapsFields) {
  const auto parsed = parse_tape(tape({"5,AB1,Q,,,10.00,10.02,300,400"}));
  ASSERT_EQ(parsed.records.size(), 1u);
  EXPECT_EQ(parsed.records[0], TickRecord::quote(5, "AB1", 10.00, 10.02, 300, 400));
}

TEST(ParseTape, CrossedQuoteCounted) {
  const auto parsed = parse_tape(tape({"5,AB,Q,,,10.05,10.02,100,100", "6,AB,Q,,,10.02,10.02,1,1"}));
  EXPECT_EQ(parsed.report.rejected_crossed, 1u);
  EXPECT_EQ(parsed.report.rejected_malformed, 0u);
  EXPECT_EQ(parsed.report.accepted, 1u);
  ASSERT_EQ(parsed.report.issues.size(), 1u);
  EXPECT_EQ(parsed.report.issues[0].line, 2u);
}

TEST(ParseTape, BadHeaderIsFatal) {
  try {
    parse_tape("time,ticker\n1,A,T,1,1,,,,\n");
    FAIL() << "expected MalformedHeader";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedHeader);
  }
  EXPECT_THROW(parse_tape(""), Error);
}

TEST(ParseTape, BomAndCrlfAccepted) {
  std::string s = "\xEF\xBB\xBF" + std::string(kTapeHeader) + "\r\n1,A,T,1.5,2,,,,\r\n";
  const auto parsed = parse_tape(s);
  EXPECT_EQ(parsed.report.accepted, 1u);
  EXPECT_EQ(parsed.report.rejected(), 0u);
}

TEST(ParseTape, MalformedRowsCountedNotFatal) {
  const auto parsed = parse_tape(tape({
      "1,A,T,1,1,,,",            // 8 fields
      "0,A,T,1,1,,,,",           // non-positive timestamp
      "x,A,T,1,1,,,,",           // non-integer timestamp
      "1,ibm,T,1,1,,,,",         // lowercase ticker
      "1,,T,1,1,,,,",            // empty ticker
      "1,A,X,1,1,,,,",           // unknown kind
      "1,A,T,-1,1,,,,",          // signed price
      "1,A,T,0,1,,,,",           // zero price
      "1,A,T,1e2,1,,,,",         // exponent
      "1,A,T,1.,1,,,,",          // dangling dot
      "1,A,T,1,1,1,,,",          // trade with quote field
      "1,A,Q,1,,1,2,3,4",        // quote with trade field
      "1,A,Q,,,1,2,3,",          // missing ask size
      "1,A,T,nan,1,,,,",         // not a decimal
      "2,A,T,185.30,200,,,,",    // good
  }));
  EXPECT_EQ(parsed.report.rejected_malformed, 14u);
  EXPECT_EQ(parsed.report.rejected_crossed, 0u);
  EXPECT_EQ(parsed.report.accepted, 1u);
  ASSERT_EQ(parsed.records.size(), 1u);
  EXPECT_EQ(parsed.records[0].timestamp, 2);
}

TEST(ParseTape, ThousandSyntheticRowsRoundTrip) {
  SynthConfig cfg;
  cfg.seed = 11;
  auto records = generate(cfg);
  ASSERT_GE(records.size(), 1000u);
  records.resize(1000);
  const auto parsed = parse_tape(serialize_tape(records));
  EXPECT_EQ(parsed.records.size(), 1000u);
  EXPECT_EQ(parsed.report.accepted, 1000u);
  EXPECT_EQ(parsed.report.rejected_malformed, 0u);
  EXPECT_EQ(parsed.report.rejected_crossed, 0u);
  EXPECT_EQ(parsed.records, records);
}

TEST(ParseTape, RoundTripRandomRecords) {
  Rng rng(2024);
  std::vector<TickRecord> records;
  auto positive = [&] {
    switch (rng.below(4)) {
      case 0: return std::round(rng.uniform(0.01, 1000.0) * 100) / 100;
      case 1: return rng.uniform(1e-9, 1e-3);
      case 2: return rng.uniform(1.0, 1e12);
      default: return static_cast<double>(1 + rng.below(100000));
    }
  };
  const std::string tickers[] = {"A", "IBM", "BRK2", "Z9Z"};
  for (int i = 0; i < 5000; ++i) {
    const auto ts = static_cast<std::int64_t>(1 + rng.below(1ULL << 62));
    const std::string& tk = tickers[rng.below(4)];
    if (rng.bernoulli(0.5)) {
      records.push_back(TickRecord::trade(ts, tk, positive(), positive()));
    } else {
      const double bid = positive();
      records.push_back(TickRecord::quote(ts, tk, bid, bid + (rng.bernoulli(0.2) ? 0.0 : positive()),
                                          positive(), positive()));
    }
  }
  const std::string bytes = serialize_tape(records);
  const auto parsed = parse_tape(bytes);
  EXPECT_EQ(parsed.report.rejected(), 0u);
  EXPECT_EQ(parsed.records, records);
  EXPECT_EQ(serialize_tape(parsed.records), bytes);
}

TEST(SessionWindow, DefaultsAndValidation) {
  SessionWindow w;
  EXPECT_EQ(w.start_seconds, 11 * 3600);
  EXPECT_EQ(w.end_seconds, 16 * 3600);
  EXPECT_EQ(w.minutes(), 300);
  EXPECT_THROW(SessionWindow::parse("16:00", "11:00"), Error);
  EXPECT_THROW(SessionWindow::parse("11:00", "11:00"), Error);
  EXPECT_THROW(SessionWindow::parse("25:00", "26:00"), Error);
  EXPECT_EQ(SessionWindow::parse("09:30", "16:00:00").minutes(), 390);
}

TEST(FilterSession, Boundaries) {
  const TimeZone tz = TimeZone::parse("America/New_York");
  const std::int64_t ms = 1'000'000;
  std::vector<TickRecord> recs{
      TickRecord::trade(local_ns(kDay, 10 * 3600 + 59 * 60 + 59, kEdt) + 999 * ms, "A", 1, 1),
      TickRecord::trade(local_ns(kDay, 11 * 3600, kEdt), "A", 2, 1),
      TickRecord::trade(local_ns(kDay, 16 * 3600, kEdt) - 1, "A", 3, 1),
      TickRecord::trade(local_ns(kDay, 16 * 3600, kEdt), "A", 4, 1),
  };
  const auto kept = filter_session(recs, SessionWindow{}, tz);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].trade_price, 2);
  EXPECT_EQ(kept[1].trade_price, 3);
}

TEST(FilterSession, FullDayTapeMatchesBruteForceCount) {
  const TimeZone tz = TimeZone::parse("America/New_York");
  std::vector<TickRecord> recs;
  std::size_t expected = 0;
  for (std::int64_t s = 9 * 3600 + 30 * 60; s <= 16 * 3600; ++s) {
    recs.push_back(TickRecord::trade(local_ns(kDay, s, kEdt), "SPY", 500, 1));
    // independent oracle: wall-clock second in [39600, 57600)
    const std::int64_t utc = recs.back().timestamp / kNanosPerSecond;
    const std::int64_t wall = ((utc + kEdt) % 86400 + 86400) % 86400;
    expected += wall >= 39600 && wall < 57600;
  }
  ASSERT_EQ(recs.size(), 23401u);
  EXPECT_EQ(expected, 18000u);
  EXPECT_EQ(filter_session(recs, SessionWindow{}, tz).size(), expected);
}

TEST(FilterSession, Idempotent) {
  SynthConfig cfg;
  cfg.session = SessionWindow::parse("10:00", "17:00");
  cfg.days = 2;
  const auto recs = generate(cfg);
  const TimeZone tz = TimeZone::parse("America/New_York");
  const auto once = filter_session(recs, SessionWindow{}, tz);
  EXPECT_LT(once.size(), recs.size());
  EXPECT_GT(once.size(), 0u);
  EXPECT_EQ(filter_session(once, SessionWindow{}, tz), once);
}

TEST(FilterSession, PreservesOrderAndInterleavedTickers) {
  const TimeZone tz = TimeZone::utc();
  const std::int64_t t0 = local_ns(kDay, 12 * 3600, 0);
  std::vector<TickRecord> recs{
      TickRecord::trade(t0 + 5, "A", 1, 1), TickRecord::trade(t0 + 1, "B", 2, 1),
      TickRecord::trade(t0 + 5, "A", 3, 1), TickRecord::trade(t0 + 9, "B", 4, 1),
      TickRecord::trade(t0 + 6, "A", 5, 1)};
  EXPECT_EQ(filter_session(recs, SessionWindow{}, tz), recs);
}

TEST(FilterSession, UnsortedInputRejected) {
  const TimeZone tz = TimeZone::utc();
  const std::int64_t t0 = local_ns(kDay, 12 * 3600, 0);
  std::vector<TickRecord> recs{TickRecord::trade(t0 + 5, "A", 1, 1),
                               TickRecord::trade(t0 + 9, "B", 1, 1),
                               TickRecord::trade(t0 + 4, "A", 1, 1)};
  try {
    filter_session(recs, SessionWindow{}, tz);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsortedInput);
  }
  // also enforced outside the window
  recs = {TickRecord::trade(local_ns(kDay, 3600, 0), "A", 1, 1),
          TickRecord::trade(local_ns(kDay, 3000, 0), "A", 1, 1)};
  EXPECT_THROW(filter_session(recs, SessionWindow{}, tz), Error);
}

TEST(FilterSession, FollowsDaylightSaving) {
  const TimeZone tz = TimeZone::parse("America/New_York");
  // 15:00 UTC is 10:00 EST before 2024-03-10 and 11:00 EDT after it.
  const std::int64_t before = parse_date("2024-03-08"), after = parse_date("2024-03-11");
  std::vector<TickRecord> recs{
      TickRecord::trade((before * kSecondsPerDay + 15 * 3600) * kNanosPerSecond, "A", 1, 1),
      TickRecord::trade((after * kSecondsPerDay + 15 * 3600) * kNanosPerSecond, "A", 2, 1)};
  const auto kept = filter_session(recs, SessionWindow{}, tz);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].trade_price, 2);
}

TEST(TimeZone, OffsetsAndParsing) {
  EXPECT_EQ(TimeZone::utc().offset_at(0), 0);
  EXPECT_EQ(TimeZone::parse("+05:30").offset_at(123), 5 * 3600 + 30 * 60);
  EXPECT_EQ(TimeZone::parse("-04:00").offset_at(123), -4 * 3600);
  const TimeZone ny = TimeZone::parse("America/New_York");
  EXPECT_EQ(ny.offset_at(kDay * kSecondsPerDay), kEdt);
  EXPECT_EQ(ny.offset_at(parse_date("2024-01-15") * kSecondsPerDay), -5 * 3600);
  EXPECT_EQ(ny.local_to_utc(kDay * kSecondsPerDay + 11 * 3600), 1722870000);
  EXPECT_THROW(TimeZone::parse("Not/AZone"), Error);
  EXPECT_THROW(TimeZone::parse("+5"), Error);
  EXPECT_THROW(TimeZone::parse(""), Error);
  EXPECT_EQ(format_date(kDay), "2024-08-05");
  EXPECT_EQ(parse_date("2024-08-05"), kDay);
  EXPECT_EQ(parse_time_of_day("11:03:07"), 11 * 3600 + 3 * 60 + 7);
  EXPECT_EQ(format_time_of_day(39600), "11:00:00");
  EXPECT_THROW(parse_time_of_day("11:60"), Error);
}
