#pragma once

// Minute reduction: per minute keep the first trade and the arithmetic means
// of the quoted prices and sizes. Minutes missing either a trade or a quote
// are skipped, never filled.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liqlab/csv.hpp"
#include "liqlab/tickdata.hpp"

namespace liqlab {

struct MinuteBucket {
  std::string ticker;
  std::int64_t minute_start = 0;  // ns, truncated to the minute
  double first_trade_price = 0.0;
  double first_trade_size = 0.0;
  std::int64_t first_trade_time = 0;
  double avg_bid_price = 0.0;
  double avg_ask_price = 0.0;
  double avg_bid_size = 0.0;
  double avg_ask_size = 0.0;
  std::int64_t quote_count = 0;
  std::int64_t trade_count = 0;

  friend bool operator==(const MinuteBucket&, const MinuteBucket&) = default;
};

constexpr std::int64_t minute_of(std::int64_t timestamp) {
  return timestamp - floor_mod(timestamp, kNanosPerMinute);
}

/// Reduces one ticker-day of session records (time-sorted) to minute buckets
/// in increasing minute order. The first trade is the earliest, ties going
/// to the record that comes first in the input.
inline std::vector<MinuteBucket> bucketize(std::span<const TickRecord> records) {
  std::vector<MinuteBucket> out;
  std::size_t i = 0;
  while (i < records.size()) {
    const std::int64_t minute = minute_of(records[i].timestamp);
    MinuteBucket b;
    b.ticker = records[i].ticker;
    b.minute_start = minute;
    double sum_bid = 0, sum_ask = 0, sum_bid_size = 0, sum_ask_size = 0;
    const TickRecord* first_trade = nullptr;
    for (; i < records.size() && minute_of(records[i].timestamp) == minute; ++i) {
      const TickRecord& r = records[i];
      if (r.is_trade()) {
        ++b.trade_count;
        if (first_trade == nullptr || r.timestamp < first_trade->timestamp) first_trade = &r;
      } else {
        ++b.quote_count;
        sum_bid += r.bid_price;
        sum_ask += r.ask_price;
        sum_bid_size += r.bid_size;
        sum_ask_size += r.ask_size;
      }
    }
    if (first_trade == nullptr || b.quote_count == 0) continue;
    const auto n = static_cast<double>(b.quote_count);
    b.first_trade_price = first_trade->trade_price;
    b.first_trade_size = first_trade->trade_size;
    b.first_trade_time = first_trade->timestamp;
    b.avg_bid_price = sum_bid / n;
    b.avg_ask_price = sum_ask / n;
    b.avg_bid_size = sum_bid_size / n;
    b.avg_ask_size = sum_ask_size / n;
    out.push_back(std::move(b));
  }
  return out;
}

inline constexpr std::string_view kBucketHeader =
    "ticker,minute_start,first_trade_price,first_trade_size,avg_bid_price,avg_ask_price,"
    "avg_bid_size,avg_ask_size,quote_count,trade_count";

inline void append_bucket_row(std::string& out, const MinuteBucket& b) {
  out += b.ticker;
  out += ',';
  out += std::to_string(b.minute_start);
  for (double v : {b.first_trade_price, b.first_trade_size, b.avg_bid_price, b.avg_ask_price,
                   b.avg_bid_size, b.avg_ask_size}) {
    out += ',';
    csv::append_double(out, v);
  }
  out += ',';
  out += std::to_string(b.quote_count);
  out += ',';
  out += std::to_string(b.trade_count);
  out += '\n';
}

}  // namespace liqlab
