#pragma once

// Tick-level data model, the tape CSV reader/writer and the session filter.
//
// Tape layout (UTF-8, one header line):
//   timestamp,ticker,kind,trade_price,trade_size,bid_price,ask_price,bid_size,ask_size
// kind is T (trade: trade_* set, quote fields empty) or Q (quote: bid/ask
// fields set, trade fields empty). Timestamps are integer nanoseconds since
// the Unix epoch. Prices and sizes are plain positive decimals.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "liqlab/csv.hpp"
#include "liqlab/error.hpp"
#include "liqlab/timezone.hpp"

namespace liqlab {

inline constexpr std::string_view kTapeHeader =
    "timestamp,ticker,kind,trade_price,trade_size,bid_price,ask_price,bid_size,ask_size";

enum class TickKind : char { Trade = 'T', Quote = 'Q' };

/// One trade or quote event. Fields of the other kind are zero.
struct TickRecord {
  std::int64_t timestamp = 0;
  std::string ticker;
  TickKind kind = TickKind::Trade;
  double trade_price = 0.0;
  double trade_size = 0.0;
  double bid_price = 0.0;
  double ask_price = 0.0;
  double bid_size = 0.0;
  double ask_size = 0.0;

  bool is_trade() const { return kind == TickKind::Trade; }
  bool is_quote() const { return kind == TickKind::Quote; }

  static TickRecord trade(std::int64_t ts, std::string ticker, double price, double size) {
    TickRecord r;
    r.timestamp = ts;
    r.ticker = std::move(ticker);
    r.kind = TickKind::Trade;
    r.trade_price = price;
    r.trade_size = size;
    return r;
  }

  static TickRecord quote(std::int64_t ts, std::string ticker, double bid, double ask,
                          double bid_size, double ask_size) {
    TickRecord r;
    r.timestamp = ts;
    r.ticker = std::move(ticker);
    r.kind = TickKind::Quote;
    r.bid_price = bid;
    r.ask_price = ask;
    r.bid_size = bid_size;
    r.ask_size = ask_size;
    return r;
  }

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

/// Half-open wall-clock window [start, end) in seconds after local midnight.
struct SessionWindow {
  std::int64_t start_seconds = 11 * 3600;
  std::int64_t end_seconds = 16 * 3600;

  SessionWindow() = default;
  SessionWindow(std::int64_t start, std::int64_t end) : start_seconds(start), end_seconds(end) {
    if (start < 0 || end > kSecondsPerDay || start >= end)
      throw Error(ErrorKind::Config, "session window needs start < end within one day");
  }

  static SessionWindow parse(std::string_view start, std::string_view end) {
    return SessionWindow(parse_time_of_day(start), parse_time_of_day(end));
  }

  std::int64_t minutes() const { return (end_seconds - start_seconds) / 60; }

  bool contains_time_of_day(std::int64_t nanos_after_midnight) const {
    return nanos_after_midnight >= start_seconds * kNanosPerSecond &&
           nanos_after_midnight < end_seconds * kNanosPerSecond;
  }
};

struct IngestIssue {
  std::size_t line = 0;
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rejected_malformed = 0;
  std::size_t rejected_crossed = 0;
  std::vector<IngestIssue> issues;  // first kMaxIssues problems, in file order

  static constexpr std::size_t kMaxIssues = 50;

  std::size_t rejected() const { return rejected_malformed + rejected_crossed; }
};

struct ParsedTape {
  std::vector<TickRecord> records;
  IngestReport report;
};

namespace detail {

// Accepts digits with an optional fractional part ("185", "185.30"); rejects
// signs, exponents and zero. Validation is textual so that a value is never
// accepted on the strength of a lenient float parse.
inline bool parse_positive_decimal(std::string_view s, double& out) {
  if (s.empty()) return false;
  bool seen_dot = false;
  bool nonzero = false;
  std::size_t digits_before = 0;
  std::size_t digits_after = 0;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) return false;
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      (seen_dot ? digits_after : digits_before)++;
      nonzero |= c != '0';
    } else {
      return false;
    }
  }
  if (digits_before == 0 || (seen_dot && digits_after == 0) || !nonzero) return false;
  return csv::parse_double(s, out);
}

inline bool valid_ticker(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
  return true;
}

}  // namespace detail

/// Parses a whole tape held in memory. A bad header throws MalformedHeader;
/// bad rows are counted in the report and skipped.
inline ParsedTape parse_tape(std::string_view bytes) {
  ParsedTape out;
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
  csv::LineReader lines(bytes);
  std::string_view line;
  if (!lines.next(line) || line != kTapeHeader)
    throw Error(ErrorKind::MalformedHeader,
                "expected header '" + std::string(kTapeHeader) + "', got '" + std::string(line) +
                    "'");

  auto& rep = out.report;
  auto reject = [&](std::size_t& counter, std::string reason) {
    ++counter;
    if (rep.issues.size() < IngestReport::kMaxIssues)
      rep.issues.push_back({lines.line_number(), std::move(reason)});
  };

  std::vector<std::string_view> f;
  f.reserve(9);
  while (lines.next(line)) {
    if (line.empty()) continue;
    csv::split(line, f);
    if (f.size() != 9) {
      reject(rep.rejected_malformed, "expected 9 fields");
      continue;
    }
    TickRecord r;
    if (!csv::parse_int(f[0], r.timestamp) || r.timestamp <= 0) {
      reject(rep.rejected_malformed, "bad timestamp");
      continue;
    }
    if (!detail::valid_ticker(f[1])) {
      reject(rep.rejected_malformed, "bad ticker");
      continue;
    }
    r.ticker = std::string(f[1]);
    if (f[2] == "T") {
      r.kind = TickKind::Trade;
      if (!detail::parse_positive_decimal(f[3], r.trade_price) ||
          !detail::parse_positive_decimal(f[4], r.trade_size) || !f[5].empty() || !f[6].empty() ||
          !f[7].empty() || !f[8].empty()) {
        reject(rep.rejected_malformed, "bad trade fields");
        continue;
      }
    } else if (f[2] == "Q") {
      r.kind = TickKind::Quote;
      if (!f[3].empty() || !f[4].empty() || !detail::parse_positive_decimal(f[5], r.bid_price) ||
          !detail::parse_positive_decimal(f[6], r.ask_price) ||
          !detail::parse_positive_decimal(f[7], r.bid_size) ||
          !detail::parse_positive_decimal(f[8], r.ask_size)) {
        reject(rep.rejected_malformed, "bad quote fields");
        continue;
      }
      if (r.ask_price < r.bid_price) {
        reject(rep.rejected_crossed, "crossed quote");
        continue;
      }
    } else {
      reject(rep.rejected_malformed, "kind must be T or Q");
      continue;
    }
    out.records.push_back(std::move(r));
    ++rep.accepted;
  }
  return out;
}

inline void append_tape_row(std::string& out, const TickRecord& r) {
  out += std::to_string(r.timestamp);
  out += ',';
  out += r.ticker;
  out += ',';
  out += static_cast<char>(r.kind);
  out += ',';
  if (r.is_trade()) {
    csv::append_plain_double(out, r.trade_price);
    out += ',';
    csv::append_plain_double(out, r.trade_size);
    out += ",,,,\n";
  } else {
    out += ",,";
    csv::append_plain_double(out, r.bid_price);
    out += ',';
    csv::append_plain_double(out, r.ask_price);
    out += ',';
    csv::append_plain_double(out, r.bid_size);
    out += ',';
    csv::append_plain_double(out, r.ask_size);
    out += '\n';
  }
}

inline std::string serialize_tape(std::span<const TickRecord> records) {
  std::string out(kTapeHeader);
  out += '\n';
  out.reserve(records.size() * 48);
  for (const auto& r : records) append_tape_row(out, r);
  return out;
}

/// Keeps records whose local time of day lies in the session window. Each
/// ticker's records must be non-decreasing in time; order is preserved.
inline std::vector<TickRecord> filter_session(std::span<const TickRecord> records,
                                              const SessionWindow& window, const TimeZone& tz) {
  std::vector<TickRecord> out;
  std::unordered_map<std::string_view, std::int64_t> last_seen;
  LocalClock clock(tz);
  std::string_view prev_ticker;
  std::int64_t* prev_last = nullptr;
  for (const auto& r : records) {
    if (prev_last == nullptr || r.ticker != prev_ticker) {
      prev_ticker = r.ticker;
      prev_last = &last_seen.try_emplace(prev_ticker, INT64_MIN).first->second;
    }
    if (r.timestamp < *prev_last)
      throw Error(ErrorKind::UnsortedInput, "timestamp decreases for ticker " + r.ticker + " at " +
                                                std::to_string(r.timestamp));
    *prev_last = r.timestamp;
    if (window.contains_time_of_day(clock.time_of_day_nanos(r.timestamp))) out.push_back(r);
  }
  return out;
}

}  // namespace liqlab
