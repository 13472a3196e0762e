#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "redlab/errors.hpp"

namespace redlab {

/// Timestamps are UTC microseconds since the Unix epoch. ISO-8601 is the
/// wire format; this header does the calendar math directly (proleptic
/// Gregorian, via the days-from-civil algorithm) so parsing behaves the
/// same on every platform.

namespace detail {

inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m,
                            unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = yr + (m <= 2);
}

inline bool is_leap(std::int64_t y) {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

inline unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30,
                                           31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

} // namespace detail

struct ParsedTimestamp {
    std::int64_t micros = 0; // UTC microseconds since epoch
    bool date_only = false;  // input carried no time component
};

/// Accepts `YYYY-MM-DD`, optionally followed by `T` or a space and
/// `HH:MM:SS`, an optional fractional part (truncated past microseconds),
/// and an optional zone: `Z`, `±HH:MM`, `±HHMM`, or `±HH`. No zone means
/// UTC. Date-only inputs resolve to midnight and are flagged so callers
/// can warn.
inline ParsedTimestamp parse_iso8601(std::string_view text) {
    const auto fail = [&](const char* why) -> ParsedTimestamp {
        throw ParseError("bad timestamp '" + std::string(text) + "': " + why);
    };

    std::size_t pos = 0;
    const auto digits = [&](int count) -> std::int64_t {
        std::int64_t v = 0;
        for (int k = 0; k < count; ++k) {
            if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
                fail("expected digit");
            v = v * 10 + (text[pos++] - '0');
        }
        return v;
    };
    const auto expect = [&](char c) {
        if (pos >= text.size() || text[pos] != c) fail("unexpected separator");
        ++pos;
    };

    const std::int64_t year = digits(4);
    expect('-');
    const unsigned month = static_cast<unsigned>(digits(2));
    expect('-');
    const unsigned day = static_cast<unsigned>(digits(2));
    if (month < 1 || month > 12) fail("month out of range");
    if (day < 1 || day > detail::days_in_month(year, month))
        fail("day out of range");

    ParsedTimestamp out;
    std::int64_t h = 0, mi = 0, s = 0, frac_us = 0, offset_min = 0;

    if (pos == text.size()) {
        out.date_only = true;
    } else {
        if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')
            fail("expected 'T' or space before time");
        ++pos;
        h = digits(2);
        expect(':');
        mi = digits(2);
        expect(':');
        s = digits(2);
        if (h > 23 || mi > 59 || s > 59) fail("time out of range");

        if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
            ++pos;
            std::int64_t scale = 100000;
            std::size_t nd = 0;
            while (pos < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[pos]))) {
                if (nd < 6) frac_us += (text[pos] - '0') * scale;
                scale /= 10;
                ++nd;
                ++pos;
            }
            if (nd == 0) fail("empty fractional seconds");
        }

        if (pos < text.size()) {
            const char z = text[pos];
            if (z == 'Z' || z == 'z') {
                ++pos;
            } else if (z == '+' || z == '-') {
                ++pos;
                const std::int64_t oh = digits(2);
                std::int64_t om = 0;
                if (pos < text.size()) {
                    if (text[pos] == ':') ++pos;
                    if (pos < text.size() &&
                        std::isdigit(static_cast<unsigned char>(text[pos])))
                        om = digits(2);
                }
                if (oh > 14 || om > 59) fail("zone offset out of range");
                offset_min = (oh * 60 + om) * (z == '+' ? 1 : -1);
            } else {
                fail("trailing garbage");
            }
        }
        if (pos != text.size()) fail("trailing garbage");
    }

    const std::int64_t days = detail::days_from_civil(year, month, day);
    out.micros = ((days * 24 + h) * 60 + mi - offset_min) * 60'000'000 +
                 s * 1'000'000 + frac_us;
    return out;
}

/// Canonical wire form: always UTC, always microsecond precision, e.g.
/// `2014-10-22T11:15:30.000000Z`.
inline std::string format_iso8601(std::int64_t micros) {
    std::int64_t days = micros / 86'400'000'000;
    std::int64_t rem = micros % 86'400'000'000;
    if (rem < 0) {
        rem += 86'400'000'000;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    detail::civil_from_days(days, y, m, d);
    const std::int64_t us = rem % 1'000'000;
    const std::int64_t sec_of_day = rem / 1'000'000;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ",
                  static_cast<long long>(y), m, d,
                  static_cast<long long>(sec_of_day / 3600),
                  static_cast<long long>(sec_of_day / 60 % 60),
                  static_cast<long long>(sec_of_day % 60),
                  static_cast<long long>(us));
    return buf;
}

} // namespace redlab
