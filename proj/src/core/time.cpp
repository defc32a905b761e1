#include "seaflow/core/time.hpp"

#include <array>
#include <chrono>
#include <cstdio>

namespace seaflow {

namespace {

constexpr std::array<unsigned, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30,
                                                   31, 31, 30, 31, 30, 31};

constexpr bool is_leap(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    if (m == 2 && is_leap(y)) return 29;
    return kDaysInMonth[m - 1];
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = yy + (m <= 2);
}

}  // namespace

CivilDateTime civil_from_timestamp(TimestampMs t) {
    std::int64_t days = t / 86400000;
    std::int64_t rem = t % 86400000;
    if (rem < 0) {
        rem += 86400000;
        days -= 1;
    }
    CivilDateTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<unsigned>(rem / kMsPerHour);
    c.minute = static_cast<unsigned>((rem / kMsPerMinute) % 60);
    c.second = static_cast<unsigned>((rem / kMsPerSecond) % 60);
    c.millisecond = static_cast<unsigned>(rem % 1000);
    return c;
}

TimestampMs timestamp_from_civil(const CivilDateTime& c) {
    return days_from_civil(c.year, c.month, c.day) * 86400000 +
           static_cast<TimestampMs>(c.hour) * kMsPerHour +
           static_cast<TimestampMs>(c.minute) * kMsPerMinute +
           static_cast<TimestampMs>(c.second) * kMsPerSecond + c.millisecond;
}

std::optional<TimestampMs> parse_iso8601(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS[.fff...]Z
    const char* s = text.c_str();
    auto digits = [&](size_t pos, size_t n, long& out) {
        out = 0;
        for (size_t i = pos; i < pos + n; ++i) {
            if (s[i] < '0' || s[i] > '9') return false;
            out = out * 10 + (s[i] - '0');
        }
        return true;
    };
    if (text.size() < 20) return std::nullopt;
    long y, mo, d, h, mi, se;
    if (!digits(0, 4, y) || s[4] != '-' || !digits(5, 2, mo) || s[7] != '-' ||
        !digits(8, 2, d) || (s[10] != 'T' && s[10] != 't') || !digits(11, 2, h) ||
        s[13] != ':' || !digits(14, 2, mi) || s[16] != ':' || !digits(17, 2, se))
        return std::nullopt;
    size_t pos = 19;
    long frac_ms = 0;
    if (s[pos] == '.') {
        ++pos;
        int nd = 0;
        long frac = 0;
        while (s[pos] >= '0' && s[pos] <= '9') {
            if (nd < 3) frac = frac * 10 + (s[pos] - '0');
            ++nd;
            ++pos;
        }
        if (nd == 0) return std::nullopt;
        while (nd < 3 && nd >= 0) {
            frac *= 10;
            ++nd;
        }
        frac_ms = frac;
    }
    if (s[pos] != 'Z' && s[pos] != 'z') return std::nullopt;
    if (pos + 1 != text.size()) return std::nullopt;

    if (mo < 1 || mo > 12) return std::nullopt;
    if (d < 1 || static_cast<unsigned>(d) > days_in_month(y, static_cast<unsigned>(mo)))
        return std::nullopt;
    if (h > 23 || mi > 59 || se > 60) return std::nullopt;  // 60 tolerated (leap second), clamps
    if (se == 60) se = 59;

    CivilDateTime c{y, static_cast<unsigned>(mo), static_cast<unsigned>(d),
                    static_cast<unsigned>(h), static_cast<unsigned>(mi),
                    static_cast<unsigned>(se), static_cast<unsigned>(frac_ms)};
    return timestamp_from_civil(c);
}

std::string format_iso8601(TimestampMs t) {
    const CivilDateTime c = civil_from_timestamp(t);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02u:%02u:%02u.%03uZ",
                  static_cast<long long>(c.year), c.month, c.day, c.hour, c.minute,
                  c.second, c.millisecond);
    return buf;
}

TimestampMs wall_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace seaflow
