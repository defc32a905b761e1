#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace seaflow {

/// Epoch-milliseconds UTC. All platform timestamps use this resolution;
/// the simulator's virtual clock counts in the same unit.
using TimestampMs = std::int64_t;

constexpr TimestampMs kMsPerSecond = 1000;
constexpr TimestampMs kMsPerMinute = 60 * kMsPerSecond;
constexpr TimestampMs kMsPerHour = 60 * kMsPerMinute;

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDateTime {
    std::int64_t year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31
    unsigned hour = 0;
    unsigned minute = 0;
    unsigned second = 0;
    unsigned millisecond = 0;
};

CivilDateTime civil_from_timestamp(TimestampMs t);
TimestampMs timestamp_from_civil(const CivilDateTime& c);

/// "2024-01-01T00:00:00Z" or with fractional seconds; UTC ("Z") only.
std::optional<TimestampMs> parse_iso8601(const std::string& text);

/// Canonical rendering, millisecond precision: "2024-01-01T00:00:00.000Z".
std::string format_iso8601(TimestampMs t);

/// Wall clock now, for service mode. Deterministic runs never call this.
TimestampMs wall_clock_ms();

}  // namespace seaflow
