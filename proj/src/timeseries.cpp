#include "deckforge/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "deckforge/error.hpp"

namespace deckforge {

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

// Nearest double to the 4-decimal value, so CSV text round-trips exactly.
double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

Date parse_iso_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  auto field = [&](std::string_view s, auto& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !field(text.substr(0, 4), y) ||
      !field(text.substr(5, 2), m) || !field(text.substr(8, 2), d)) {
    throw Error(ErrorCode::kParse, "invalid date '" + std::string(text) + "'");
  }
  Date date{year{y}, month{m}, day{d}};
  if (!date.ok()) throw Error(ErrorCode::kParse, "invalid date '" + std::string(text) + "'");
  return date;
}

std::string format_iso_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Date week_start(Date d) {
  sys_days sd{d};
  weekday wd{sd};
  return Date{sd - (wd - Monday)};
}

TimeSeries::TimeSeries(std::string name, std::vector<OhlcvPoint> points)
    : name_(std::move(name)), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    const std::string row = "row " + std::to_string(i + 1);
    if (i > 0 && !(sys_days{points_[i - 1].date} < sys_days{p.date})) {
      throw Error(ErrorCode::kOrdering, row + ": dates must be strictly increasing");
    }
    if (p.high < std::max(p.open, p.close)) {
      throw Error(ErrorCode::kValidation, row + ": high below max(open, close)");
    }
    if (p.low > std::min(p.open, p.close)) {
      throw Error(ErrorCode::kValidation, row + ": low above min(open, close)");
    }
    if (p.volume < 0) throw Error(ErrorCode::kValidation, row + ": negative volume");
  }
}

std::vector<double> TimeSeries::closes() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.close);
  return out;
}

std::vector<double> TimeSeries::volumes() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.volume);
  return out;
}

std::vector<Date> TimeSeries::dates() const {
  std::vector<Date> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.date);
  return out;
}

TimeSeries TimeSeries::trailing_months(int months_back) const {
  if (points_.empty()) return *this;
  const Date last = points_.back().date;
  Date cutoff = last - std::chrono::months{months_back};
  if (!cutoff.ok()) cutoff = cutoff.year() / cutoff.month() / std::chrono::last;
  std::vector<OhlcvPoint> kept;
  for (const auto& p : points_) {
    if (sys_days{p.date} > sys_days{cutoff}) kept.push_back(p);
  }
  return TimeSeries(name_, std::move(kept));
}

TimeSeries parse_timeseries_csv(std::string_view text, std::string name) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto pos = text.find('\n', start);
      if (pos == std::string_view::npos) pos = text.size();
      auto line = trim(text.substr(start, pos - start));
      if (!line.empty()) lines.push_back(line);
      start = pos + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::kFormat, "empty CSV: missing header");

  static constexpr std::string_view kColumns[] = {"date", "open", "high", "low", "close", "volume"};
  auto header = split(lines[0], ',');
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].remove_prefix(3);
  int index[6];
  for (int c = 0; c < 6; ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw Error(ErrorCode::kFormat, "missing column '" + std::string(kColumns[c]) + "'");
    }
    index[c] = static_cast<int>(it - header.begin());
  }

  std::vector<OhlcvPoint> points;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto cells = split(lines[r], ',');
    const std::string row = "row " + std::to_string(r);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kFormat, row + ": expected " + std::to_string(header.size()) + " cells");
    }
    OhlcvPoint p;
    try {
      p.date = parse_iso_date(cells[index[0]]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, row + ": " + e.what());
    }
    double* targets[] = {&p.open, &p.high, &p.low, &p.close, &p.volume};
    for (int c = 1; c < 6; ++c) {
      if (!parse_number(cells[index[c]], *targets[c - 1])) {
        throw Error(ErrorCode::kParse, row + ": non-numeric " + std::string(kColumns[c]) + " '" +
                                           std::string(cells[index[c]]) + "'");
      }
    }
    points.push_back(p);
  }
  return TimeSeries(std::move(name), std::move(points));
}

TimeSeries load_timeseries_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_timeseries_csv(buf.str(), path.stem().string());
}

std::string to_csv(const TimeSeries& series) {
  std::string out = "date,open,high,low,close,volume\n";
  char buf[256];
  for (const auto& p : series.points()) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.0f\n", format_iso_date(p.date).c_str(),
                  p.open, p.high, p.low, p.close, p.volume);
    out += buf;
  }
  return out;
}

TimeSeries synthetic_ohlcv(std::string name, Date start, int business_days, std::uint64_t seed,
                           double start_price) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> ret(0.0004, 0.02);
  std::uniform_real_distribution<double> wick(0.0, 0.01);
  std::lognormal_distribution<double> vol(15.0, 0.35);

  std::vector<OhlcvPoint> points;
  points.reserve(static_cast<std::size_t>(std::max(business_days, 0)));
  sys_days day_cursor{start};
  double prev_close = start_price;
  while (static_cast<int>(points.size()) < business_days) {
    weekday wd{day_cursor};
    if (wd != Saturday && wd != Sunday) {
      OhlcvPoint p;
      p.date = Date{day_cursor};
      p.open = round4(prev_close * (1.0 + ret(rng) * 0.25));
      p.close = round4(prev_close * (1.0 + ret(rng)));
      p.high = round4(std::max(p.open, p.close) * (1.0 + wick(rng)));
      p.low = round4(std::min(p.open, p.close) * (1.0 - wick(rng)));
      p.volume = std::round(vol(rng));
      prev_close = p.close;
      points.push_back(p);
    }
    day_cursor += days{1};
  }
  return TimeSeries(std::move(name), std::move(points));
}

}  // namespace deckforge
