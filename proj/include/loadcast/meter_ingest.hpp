#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace loadcast {

// Top-of-hour timestamp: a calendar date plus an hour 0..23. No timezone.
struct Timestamp {
    std::chrono::sys_days date;
    int hour = 0;

    [[nodiscard]] std::int64_t hours_since_epoch() const noexcept {
        return static_cast<std::int64_t>(date.time_since_epoch().count()) * 24 + hour;
    }

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// Parses "YYYY-MM-DD"; anything else is rejected.
std::chrono::sys_days parse_iso_date(std::string_view text);
std::string format_iso_date(std::chrono::sys_days date);

// "YYYY-MM-DD HH:00"
std::string format_timestamp(const Timestamp& ts);
Timestamp parse_timestamp(std::string_view text);

inline constexpr int kHoursPerDay = 24;

struct WideRow {
    std::chrono::sys_days reading_date;
    std::array<double, kHoursPerDay> readings{};  // readings[h - 1] is hour column h
};

// The utility's download format: one row per day, 24 hourly kWh columns.
struct WideMeterTable {
    std::vector<WideRow> rows;
};

struct MeterPoint {
    Timestamp timestamp;
    double kwh = 0.0;

    friend bool operator==(const MeterPoint&, const MeterPoint&) = default;
};

// Ordered hourly readings; the univariate load signal.
struct MeterSeries {
    std::vector<MeterPoint> points;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] bool empty() const noexcept { return points.empty(); }
    [[nodiscard]] std::vector<double> values() const;

    friend bool operator==(const MeterSeries&, const MeterSeries&) = default;
};

// Checks the MeterSeries invariants (strictly increasing timestamps, finite
// non-negative values); throws on violation.
void validate(const MeterSeries& series);

// Parses the header "Reading Date,1,...,24" followed by one line per day.
// Trailing empty cells (as in partially exported days) count as missing and
// make the row malformed.
WideMeterTable parse_wide_csv(std::string_view text);

// Column h of date D becomes timestamp D at hour h-1.
MeterSeries transpose_to_long(const WideMeterTable& table);

enum class ZeroPolicy {
    per_point,  ///< drop every zero reading
    full_days,  ///< drop only days whose 24 readings are all zero
};

MeterSeries drop_zero_readings(const MeterSeries& series, ZeroPolicy policy = ZeroPolicy::per_point);

// Long format: header "timestamp,kwh", then "YYYY-MM-DD HH:00,<value>".
// Values are written in shortest round-trip form.
std::string write_long_csv(const MeterSeries& series);
MeterSeries parse_long_csv(std::string_view text);

std::string write_wide_csv(const WideMeterTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace loadcast
