#pragma once

// Exchange-timezone conversions. Fixed offsets ("UTC", "+05:30") are handled
// directly; IANA names ("America/New_York") are resolved through the C
// library's zoneinfo support, because the toolchain's <chrono> has no tzdb.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "liqlab/error.hpp"

namespace liqlab {

inline constexpr std::int64_t kNanosPerSecond = 1'000'000'000;
inline constexpr std::int64_t kNanosPerMinute = 60 * kNanosPerSecond;
inline constexpr std::int64_t kSecondsPerDay = 86'400;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  return a - floor_div(a, b) * b;
}

/// Parses "HH:MM" or "HH:MM:SS" into seconds after midnight.
inline std::int64_t parse_time_of_day(std::string_view text) {
  auto two = [&](std::size_t pos) -> int {
    if (pos + 2 > text.size() || text[pos] < '0' || text[pos] > '9' || text[pos + 1] < '0' ||
        text[pos + 1] > '9')
      throw Error(ErrorKind::Config, "bad time of day '" + std::string(text) + "'");
    return (text[pos] - '0') * 10 + (text[pos + 1] - '0');
  };
  if (text.size() != 5 && text.size() != 8)
    throw Error(ErrorKind::Config, "bad time of day '" + std::string(text) + "'");
  const int h = two(0);
  if (text[2] != ':') throw Error(ErrorKind::Config, "bad time of day '" + std::string(text) + "'");
  const int m = two(3);
  int s = 0;
  if (text.size() == 8) {
    if (text[5] != ':')
      throw Error(ErrorKind::Config, "bad time of day '" + std::string(text) + "'");
    s = two(6);
  }
  if (h > 24 || m > 59 || s > 59 || (h == 24 && (m != 0 || s != 0)))
    throw Error(ErrorKind::Config, "time of day out of range '" + std::string(text) + "'");
  return h * 3600 + m * 60 + s;
}

inline std::string format_time_of_day(std::int64_t seconds) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", static_cast<int>(seconds / 3600),
                static_cast<int>(seconds / 60 % 60), static_cast<int>(seconds % 60));
  return buf;
}

/// "YYYY-MM-DD" for a day count since 1970-01-01.
inline std::string format_date(std::int64_t epoch_day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{epoch_day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::int64_t parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || std::sscanf(std::string(text).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3)
    throw Error(ErrorKind::Config, "bad date '" + std::string(text) + "' (want YYYY-MM-DD)");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw Error(ErrorKind::Config, "invalid date '" + std::string(text) + "'");
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

class TimeZone {
public:
  static TimeZone utc() { return TimeZone("UTC", 0); }

  static TimeZone parse(std::string_view name) {
    if (name.empty()) throw Error(ErrorKind::Config, "timezone must not be empty");
    if (name == "UTC" || name == "Z" || name == "Etc/UTC") return utc();
    if (name[0] == '+' || name[0] == '-') {
      if (name.size() != 6 || name[3] != ':')
        throw Error(ErrorKind::Config, "bad UTC offset '" + std::string(name) + "' (want +HH:MM)");
      const std::int64_t secs = parse_time_of_day(name.substr(1));
      return TimeZone(std::string(name), name[0] == '-' ? -secs : secs);
    }
    const char* dir = std::getenv("TZDIR");
    const std::filesystem::path file =
        std::filesystem::path(dir ? dir : "/usr/share/zoneinfo") / std::string(name);
    if (name.find("..") != std::string_view::npos || !std::filesystem::is_regular_file(file))
      throw Error(ErrorKind::Config, "unknown timezone '" + std::string(name) + "'");
    return TimeZone(std::string(name), std::nullopt);
  }

  const std::string& name() const { return name_; }

  /// Seconds east of UTC in effect at the given UTC instant.
  std::int64_t offset_at(std::int64_t utc_seconds) const {
    if (fixed_offset_) return *fixed_offset_;
    static std::mutex mu;
    std::lock_guard lock(mu);
    const char* prev = std::getenv("TZ");
    const std::string saved = prev ? prev : "";
    ::setenv("TZ", name_.c_str(), 1);
    ::tzset();
    std::tm out{};
    const std::time_t t = static_cast<std::time_t>(utc_seconds);
    ::localtime_r(&t, &out);
    const std::int64_t offset = out.tm_gmtoff;
    if (prev)
      ::setenv("TZ", saved.c_str(), 1);
    else
      ::unsetenv("TZ");
    ::tzset();
    return offset;
  }

  /// UTC instant of a local wall-clock second. Nonexistent local times (DST
  /// gap) resolve with the pre-transition offset.
  std::int64_t local_to_utc(std::int64_t local_seconds) const {
    const std::int64_t guess = local_seconds - offset_at(local_seconds);
    return local_seconds - offset_at(guess);
  }

private:
  TimeZone(std::string name, std::optional<std::int64_t> fixed)
      : name_(std::move(name)), fixed_offset_(fixed) {}

  std::string name_;
  std::optional<std::int64_t> fixed_offset_;
};

// Memoizes offsets per 15-minute UTC slot; meant for scans over sorted
// timestamps where the slot rarely changes. Not shared across threads.
class LocalClock {
public:
  explicit LocalClock(const TimeZone& tz) : tz_(&tz) {}

  std::int64_t local_nanos(std::int64_t utc_nanos) {
    const std::int64_t slot = floor_div(utc_nanos, 900 * kNanosPerSecond);
    if (slot != slot_) {
      slot_ = slot;
      offset_ns_ = tz_->offset_at(slot * 900) * kNanosPerSecond;
    }
    return utc_nanos + offset_ns_;
  }

  std::int64_t local_day(std::int64_t utc_nanos) {
    return floor_div(local_nanos(utc_nanos), kSecondsPerDay * kNanosPerSecond);
  }

  std::int64_t time_of_day_nanos(std::int64_t utc_nanos) {
    return floor_mod(local_nanos(utc_nanos), kSecondsPerDay * kNanosPerSecond);
  }

private:
  const TimeZone* tz_;
  std::int64_t slot_ = INT64_MIN;
  std::int64_t offset_ns_ = 0;
};

}  // namespace liqlab
