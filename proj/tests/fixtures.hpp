#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

#include <doctest.h>

#include "deckforge/error.hpp"
#include "deckforge/skills.hpp"
#include "deckforge/timeseries.hpp"

namespace fixtures {

namespace fs = std::filesystem;

// Removed on destruction.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("deckforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// The code of the Error thrown by f; fails the test when nothing is thrown.
inline deckforge::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const deckforge::Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return deckforge::ErrorCode::kIo;
}

inline deckforge::Date day(const char* iso) { return deckforge::parse_iso_date(iso); }

inline deckforge::TimeSeries series(const std::string& name, std::uint64_t seed, int days = 300, double price = 100) {
  return deckforge::synthetic_ohlcv(name, day("2024-01-01"), days, seed, price);
}

// Tickers TSLA F GM NIO PTON AAPL plus an "Energy" sector of four series.
inline deckforge::skills::DataCatalog demo_catalog() {
  deckforge::skills::DataCatalog c;
  std::uint64_t seed = 11;
  for (const char* t : {"TSLA", "F", "GM", "NIO", "PTON", "AAPL"}) c.add({t, {series(t, seed++)}});
  c.add({"Energy", {series("BP", 31), series("CVX", 32), series("SHEL", 33), series("XOM", 34)}});
  return c;
}

}  // namespace fixtures
