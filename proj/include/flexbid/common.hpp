#pragma once

// Shared vocabulary: error type, calendar dates, power profiles and the
// handful of numeric helpers every module needs.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexbid {

enum class ErrorCode {
  InvalidArgument,
  InfeasibleBaseline,
  Infeasible,
  SolverFailure,
  InsufficientHistory,
  TooManyBids,
  EmptyInput,
  AlphaOutOfRange,
  LengthMismatch,
  GroupTooLarge,
  CycleDetected,
  DisconnectedNode,
  MultipleAncestors,
  InvalidOrdering,
  SchemaError,
  GridMismatch,
  DanglingReference,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InfeasibleBaseline: return "InfeasibleBaseline";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::TooManyBids: return "TooManyBids";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::GroupTooLarge: return "GroupTooLarge";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DisconnectedNode: return "DisconnectedNode";
    case ErrorCode::MultipleAncestors: return "MultipleAncestors";
    case ErrorCode::InvalidOrdering: return "InvalidOrdering";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

/// Signed power per time step. Units are carried by the owning field name
/// (`_kw` at building level, `_mw` at market level).
using PowerProfile = std::vector<double>;

namespace units {
inline constexpr double kw_per_mw = 1000.0;
inline constexpr double kw_to_mw(double kw) { return kw / kw_per_mw; }
inline constexpr double mw_to_kw(double mw) { return mw * kw_per_mw; }
}  // namespace units

/// Calendar day (ISO-8601 on the wire).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}) {}

  static Date parse(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_field(text.substr(0, 4), y) || !parse_field(text.substr(5, 2), m) ||
        !parse_field(text.substr(8, 2), d)) {
      fail(ErrorCode::InvalidArgument, "invalid ISO date '" + std::string(text) + "'");
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) fail(ErrorCode::InvalidArgument, "invalid calendar date '" + std::string(text) + "'");
    return Date(std::chrono::sys_days{ymd});
  }

  std::string iso() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  /// 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const { return std::chrono::weekday{days_}.c_encoding(); }
  bool is_weekend() const { return weekday() == 0 || weekday() == 6; }

  Date operator+(int n) const { return Date(days_ + std::chrono::days{n}); }
  Date operator-(int n) const { return Date(days_ - std::chrono::days{n}); }
  int operator-(Date other) const { return static_cast<int>((days_ - other.days_).count()); }

  auto operator<=>(const Date&) const = default;

 private:
  template <typename T>
  static bool parse_field(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  }

  std::chrono::sys_days days_{};
};

inline std::ostream& operator<<(std::ostream& os, Date d) { return os << d.iso(); }

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double sum(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

/// Population standard deviation.
inline double stddev(std::span<const double> a) {
  if (a.empty()) return 0.0;
  double mean = sum(a) / static_cast<double>(a.size());
  double acc = 0.0;
  for (double v : a) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Minimal diagnostic sink; library code logs exclusions and fallbacks here.
namespace log {
enum class Level { Debug = 0, Info = 1, Warn = 2, Quiet = 3 };

inline Level& threshold() {
  static Level level = Level::Warn;
  return level;
}

inline void write(Level level, const std::string& msg) {
  if (level < threshold()) return;
  static constexpr const char* tags[] = {"debug", "info", "warn"};
  std::clog << "[flexbid " << tags[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void warn(const std::string& msg) { write(Level::Warn, msg); }
}  // namespace log

}  // namespace flexbid
