#include <algorithm>
#include <sstream>
#include <string>

#include <catch_amalgamated.hpp>

#include "loadcast/errors.hpp"
#include "loadcast/meter_ingest.hpp"
#include "loadcast/random.hpp"

using namespace loadcast;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kHeader =
    "Reading Date,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20,21,22,23,24\n";

std::string day_row(const std::string& date, double first, double fill, double last) {
    std::ostringstream os;
    os << date << ", " << first;
    for (int h = 2; h <= 23; ++h) {
        os << ", " << fill;
    }
    os << ", " << last << "\n";
    return os.str();
}

std::string zeros_row(const std::string& date) {
    std::string row = date;
    for (int h = 0; h < 24; ++h) {
        row += ",0";
    }
    return row + "\n";
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::io;
}

}  // namespace

TEST_CASE("wide rows parse hour columns in order") {
    const auto table = parse_wide_csv(kHeader + zeros_row("2022-08-09") + day_row("2022-08-10", 0.42, 0.25, 1.19));
    REQUIRE(table.rows.size() == 2);
    const auto& zeros = table.rows[0];
    CHECK(format_iso_date(zeros.reading_date) == "2022-08-09");
    CHECK(std::all_of(zeros.readings.begin(), zeros.readings.end(), [](double v) { return v == 0.0; }));
    const auto& row = table.rows[1];
    CHECK(format_iso_date(row.reading_date) == "2022-08-10");
    CHECK(row.readings[0] == 0.42);
    CHECK(row.readings[1] == 0.25);
    CHECK(row.readings[23] == 1.19);
}

TEST_CASE("header-only document is an empty table") {
    CHECK(parse_wide_csv(kHeader).rows.empty());
}

TEST_CASE("wide parse errors") {
    SECTION("short row names its line") {
        const std::string doc = kHeader + zeros_row("2022-08-09") + "2022-08-10,1,2,3\n";
        try {
            parse_wide_csv(doc);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::malformed_row);
            CHECK_THAT(e.what(), ContainsSubstring("line 3"));
        }
    }
    SECTION("trailing empty cells are malformed") {
        std::string row = "2022-08-10";
        for (int h = 0; h < 22; ++h) {
            row += ",1";
        }
        row += ",,\n";
        CHECK(code_of([&] { parse_wide_csv(kHeader + row); }) == ErrorCode::malformed_row);
    }
    SECTION("non-numeric cell") {
        std::string row = "2022-08-10,abc";
        for (int h = 1; h < 24; ++h) {
            row += ",1";
        }
        CHECK(code_of([&] { parse_wide_csv(kHeader + row + "\n"); }) == ErrorCode::parse);
    }
    SECTION("duplicate date") {
        CHECK(code_of([&] { parse_wide_csv(kHeader + zeros_row("2022-08-09") + zeros_row("2022-08-09")); }) ==
              ErrorCode::duplicate_date);
    }
    SECTION("non-ISO date") {
        CHECK(code_of([&] { parse_wide_csv(kHeader + zeros_row("08/09/2022")); }) == ErrorCode::parse);
    }
    SECTION("negative reading") {
        std::string row = "2022-08-10,-1";
        for (int h = 1; h < 24; ++h) {
            row += ",1";
        }
        CHECK_THROWS_AS(parse_wide_csv(kHeader + row + "\n"), Error);
    }
    SECTION("wrong header") {
        CHECK(code_of([&] { parse_wide_csv("Date,1,2\n"); }) == ErrorCode::parse);
    }
}

TEST_CASE("transpose maps column h to hour h-1") {
    const auto table = parse_wide_csv(kHeader + day_row("2022-08-10", 0.42, 0.25, 1.19));
    const auto series = transpose_to_long(table);
    REQUIRE(series.size() == 24);
    for (int h = 0; h < 24; ++h) {
        CHECK(series.points[static_cast<std::size_t>(h)].timestamp.hour == h);
        CHECK(series.points[static_cast<std::size_t>(h)].kwh == table.rows[0].readings[static_cast<std::size_t>(h)]);
    }
    CHECK(format_timestamp(series.points.front().timestamp) == "2022-08-10 00:00");
    CHECK(format_timestamp(series.points.back().timestamp) == "2022-08-10 23:00");
}

TEST_CASE("89 days transpose to 2136 points preserving the value multiset") {
    Rng rng(7);
    WideMeterTable table;
    auto date = parse_iso_date("2022-08-09");
    for (int d = 0; d < 89; ++d) {
        WideRow row;
        row.reading_date = date + std::chrono::days(d);
        for (auto& v : row.readings) {
            v = std::round(rng.uniform(0.0, 3.0) * 100.0) / 100.0;
        }
        table.rows.push_back(row);
    }
    const auto series = transpose_to_long(table);
    REQUIRE(series.size() == 2136);
    validate(series);

    std::vector<double> wide;
    for (const auto& row : table.rows) {
        wide.insert(wide.end(), row.readings.begin(), row.readings.end());
    }
    auto longv = series.values();
    std::sort(wide.begin(), wide.end());
    std::sort(longv.begin(), longv.end());
    CHECK(wide == longv);

    // per-date values follow the wide row order
    for (std::size_t d = 0; d < table.rows.size(); ++d) {
        for (std::size_t h = 0; h < 24; ++h) {
            const auto& p = series.points[d * 24 + h];
            CHECK(p.timestamp.date == table.rows[d].reading_date);
            CHECK(p.kwh == table.rows[d].readings[h]);
        }
    }
}

TEST_CASE("drop_zero_readings") {
    const auto series = transpose_to_long(parse_wide_csv(kHeader + zeros_row("2022-08-09") +
                                                         day_row("2022-08-10", 0.0, 0.5, 1.19)));
    SECTION("per point") {
        const auto kept = drop_zero_readings(series);
        const auto zeros = std::count_if(series.points.begin(), series.points.end(),
                                         [](const MeterPoint& p) { return p.kwh == 0.0; });
        CHECK(kept.size() == series.size() - static_cast<std::size_t>(zeros));
        CHECK(kept.size() == 23);
        CHECK(format_timestamp(kept.points.front().timestamp) == "2022-08-10 01:00");
        CHECK(std::is_sorted(kept.points.begin(), kept.points.end(),
                             [](const MeterPoint& a, const MeterPoint& b) { return a.timestamp < b.timestamp; }));
    }
    SECTION("full days only") {
        const auto kept = drop_zero_readings(series, ZeroPolicy::full_days);
        CHECK(kept.size() == 24);
        CHECK(kept.points.front().kwh == 0.0);
    }
    SECTION("no zeros is identity") {
        const auto once = drop_zero_readings(series);
        CHECK(drop_zero_readings(once) == once);
    }
    SECTION("all zeros is an error") {
        const auto zeros = transpose_to_long(parse_wide_csv(kHeader + zeros_row("2022-08-09")));
        CHECK(code_of([&] { drop_zero_readings(zeros); }) == ErrorCode::empty_series);
    }
}

TEST_CASE("long CSV round-trips bit-exactly") {
    Rng rng(11);
    MeterSeries series;
    const auto date = parse_iso_date("2023-01-01");
    for (int i = 0; i < 500; ++i) {
        const double v = std::round(rng.uniform(0.0, 5.0) * 1e6) / 1e6;
        series.points.push_back({Timestamp{date + std::chrono::days(i / 24), i % 24}, v});
    }
    const std::string text = write_long_csv(series);
    CHECK(text.rfind("timestamp,kwh\n2023-01-01 00:00,", 0) == 0);
    CHECK(parse_long_csv(text) == series);
}

TEST_CASE("long CSV rejects out-of-order timestamps") {
    CHECK_THROWS_AS(parse_long_csv("timestamp,kwh\n2023-01-01 05:00,1\n2023-01-01 04:00,1\n"), Error);
}

TEST_CASE("wide CSV written back parses to the same table") {
    const auto table = parse_wide_csv(kHeader + zeros_row("2022-08-09") + day_row("2022-08-10", 0.42, 0.25, 1.19));
    const auto again = parse_wide_csv(write_wide_csv(table));
    REQUIRE(again.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(again.rows[i].reading_date == table.rows[i].reading_date);
        CHECK(again.rows[i].readings == table.rows[i].readings);
    }
}

TEST_CASE("timestamps and doubles format canonically") {
    const auto ts = parse_timestamp("2022-08-10 07:00");
    CHECK(ts.hour == 7);
    CHECK(format_timestamp(ts) == "2022-08-10 07:00");
    CHECK_THROWS_AS(parse_timestamp("2022-08-10 24:00"), Error);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(3.36) == "3.36");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
