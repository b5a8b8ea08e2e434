#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deckforge {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`. Throws Error(kParse) on anything else.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

/// Monday of the ISO week containing `d`.
Date week_start(Date d);

struct OhlcvPoint {
  Date date;
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;

  bool operator==(const OhlcvPoint&) const = default;
};

/// Daily OHLCV series. Construction validates ordering and price bounds, so
/// any TimeSeries value in hand satisfies the invariants.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::string name, std::vector<OhlcvPoint> points);

  const std::string& name() const { return name_; }
  std::span<const OhlcvPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  std::vector<double> closes() const;
  std::vector<double> volumes() const;
  std::vector<Date> dates() const;

  /// Points whose date lies strictly after `last date - months`.
  TimeSeries trailing_months(int months) const;

  bool operator==(const TimeSeries&) const = default;

 private:
  std::string name_;
  std::vector<OhlcvPoint> points_;
};

/// Reads `date,open,high,low,close,volume` CSV. Row numbers in errors are
/// 1-based data rows (the header is row 0).
TimeSeries load_timeseries_csv(const std::filesystem::path& path);
TimeSeries parse_timeseries_csv(std::string_view text, std::string name);
std::string to_csv(const TimeSeries& series);

/// Deterministic geometric random walk, weekdays only. Used for demo
/// workspaces and test fixtures.
TimeSeries synthetic_ohlcv(std::string name, Date start, int business_days,
                           std::uint64_t seed, double start_price = 100.0);

}  // namespace deckforge
