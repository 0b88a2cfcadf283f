#include "loadcast/meter_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "loadcast/errors.hpp"

namespace loadcast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        const std::string_view line =
            text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        lines.push_back(line);
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    return lines;
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

bool parse_int(std::string_view s, int& out) {
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

double parse_kwh(std::string_view cell, std::size_t line_no) {
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end) {
        fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": non-numeric cell '" + std::string(cell) + "'");
    }
    if (!std::isfinite(value) || value < 0.0) {
        fail(ErrorCode::validation,
             "line " + std::to_string(line_no) + ": kWh value must be finite and >= 0, got '" + std::string(cell) + "'");
    }
    return value;
}

}  // namespace

std::chrono::sys_days parse_iso_date(std::string_view text) {
    text = trim(text);
    int y = 0;
    int m = 0;
    int d = 0;
    const bool shape_ok = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                          parse_int(text.substr(0, 4), y) && parse_int(text.substr(5, 2), m) &&
                          parse_int(text.substr(8, 2), d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!shape_ok || !ymd.ok()) {
        fail(ErrorCode::parse, "expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return std::chrono::sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(const Timestamp& ts) {
    char buf[8];
    std::snprintf(buf, sizeof buf, " %02d:00", ts.hour);
    return format_iso_date(ts.date) + buf;
}

Timestamp parse_timestamp(std::string_view text) {
    text = trim(text);
    int hour = -1;
    if (text.size() != 16 || text[10] != ' ' || text.substr(13) != ":00" || !parse_int(text.substr(11, 2), hour) ||
        hour < 0 || hour > 23) {
        fail(ErrorCode::parse, "expected timestamp 'YYYY-MM-DD HH:00', got '" + std::string(text) + "'");
    }
    return Timestamp{parse_iso_date(text.substr(0, 10)), hour};
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::vector<double> MeterSeries::values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(p.kwh);
    }
    return out;
}

void validate(const MeterSeries& series) {
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& p = series.points[i];
        if (!std::isfinite(p.kwh) || p.kwh < 0.0) {
            fail(ErrorCode::validation, "point " + std::to_string(i) + " has invalid kWh value");
        }
        if (p.timestamp.hour < 0 || p.timestamp.hour > 23) {
            fail(ErrorCode::validation, "point " + std::to_string(i) + " has hour outside 0..23");
        }
        if (i > 0 && !(series.points[i - 1].timestamp < p.timestamp)) {
            fail(ErrorCode::validation, "timestamps not strictly increasing at point " + std::to_string(i));
        }
    }
}

WideMeterTable parse_wide_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        fail(ErrorCode::parse, "missing header line");
    }
    const auto header = split_cells(lines.front());
    bool header_ok = header.size() == kHoursPerDay + 1 && !header[0].empty();
    for (int h = 1; header_ok && h <= kHoursPerDay; ++h) {
        int label = 0;
        header_ok = parse_int(header[h], label) && label == h;
    }
    if (!header_ok) {
        fail(ErrorCode::parse, "header must be a reading-date column followed by hour columns 1..24");
    }

    WideMeterTable table;
    std::set<std::chrono::sys_days> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) {
            continue;
        }
        auto cells = split_cells(lines[i]);
        while (cells.size() > 1 && cells.back().empty()) {
            cells.pop_back();
        }
        if (cells.size() != kHoursPerDay + 1) {
            fail(ErrorCode::malformed_row, "line " + std::to_string(line_no) + " has " +
                                               std::to_string(cells.size() - 1) + " readings, expected 24");
        }
        WideRow row;
        row.reading_date = parse_iso_date(cells[0]);
        if (!seen.insert(row.reading_date).second) {
            fail(ErrorCode::duplicate_date,
                 "line " + std::to_string(line_no) + " repeats date " + format_iso_date(row.reading_date));
        }
        if (!table.rows.empty() && row.reading_date < table.rows.back().reading_date) {
            fail(ErrorCode::validation, "line " + std::to_string(line_no) + ": reading dates must increase");
        }
        for (int h = 0; h < kHoursPerDay; ++h) {
            row.readings[h] = parse_kwh(cells[h + 1], line_no);
        }
        table.rows.push_back(row);
    }
    return table;
}

MeterSeries transpose_to_long(const WideMeterTable& table) {
    MeterSeries series;
    series.points.reserve(table.rows.size() * kHoursPerDay);
    for (const auto& row : table.rows) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            series.points.push_back({Timestamp{row.reading_date, h}, row.readings[h]});
        }
    }
    return series;
}

MeterSeries drop_zero_readings(const MeterSeries& series, ZeroPolicy policy) {
    MeterSeries out;
    out.points.reserve(series.points.size());
    if (policy == ZeroPolicy::per_point) {
        std::copy_if(series.points.begin(), series.points.end(), std::back_inserter(out.points),
                     [](const MeterPoint& p) { return p.kwh != 0.0; });
    } else {
        std::set<std::chrono::sys_days> nonzero_days;
        for (const auto& p : series.points) {
            if (p.kwh != 0.0) {
                nonzero_days.insert(p.timestamp.date);
            }
        }
        std::copy_if(series.points.begin(), series.points.end(), std::back_inserter(out.points),
                     [&](const MeterPoint& p) { return nonzero_days.contains(p.timestamp.date); });
    }
    if (out.points.empty()) {
        fail(ErrorCode::empty_series, "no readings left after removing zero rows");
    }
    return out;
}

std::string write_long_csv(const MeterSeries& series) {
    std::string out = "timestamp,kwh\n";
    out.reserve(series.size() * 24 + out.size());
    for (const auto& p : series.points) {
        out += format_timestamp(p.timestamp);
        out += ',';
        out += format_double(p.kwh);
        out += '\n';
    }
    return out;
}

MeterSeries parse_long_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines.front()) != "timestamp,kwh") {
        fail(ErrorCode::parse, "long CSV must start with header 'timestamp,kwh'");
    }
    MeterSeries series;
    series.points.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) {
            continue;
        }
        const auto cells = split_cells(lines[i]);
        if (cells.size() != 2) {
            fail(ErrorCode::malformed_row, "line " + std::to_string(i + 1) + " must have 2 cells");
        }
        series.points.push_back({parse_timestamp(cells[0]), parse_kwh(cells[1], i + 1)});
    }
    validate(series);
    return series;
}

std::string write_wide_csv(const WideMeterTable& table) {
    std::string out = "Reading Date";
    for (int h = 1; h <= kHoursPerDay; ++h) {
        out += ',' + std::to_string(h);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        out += format_iso_date(row.reading_date);
        for (const double v : row.readings) {
            out += ',' + format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::io, "cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCode::io, "cannot open '" + path + "' for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        fail(ErrorCode::io, "failed writing '" + path + "'");
    }
}

}  // namespace loadcast
