#include "h2lca/timeutil.hpp"

#include "h2lca/errors.hpp"

#include <cstdio>

namespace h2lca {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

std::int64_t epoch_from_parts(const UtcParts& p) {
    return days_from_civil(p.year, p.month, p.day) * 86400 + p.hour * 3600 + p.minute * 60 +
           p.second;
}

UtcParts parts_from_epoch(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    UtcParts p;
    civil_from_days(days, p.year, p.month, p.day);
    p.hour = static_cast<int>(rem / 3600);
    p.minute = static_cast<int>((rem % 3600) / 60);
    p.second = static_cast<int>(rem % 60);
    return p;
}

namespace {

bool all_digits(const std::string& s, std::size_t from, std::size_t n) {
    if (from + n > s.size()) return false;
    for (std::size_t i = from; i < from + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

int num(const std::string& s, std::size_t from, std::size_t n) {
    int v = 0;
    for (std::size_t i = from; i < from + n; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

} // namespace

std::int64_t parse_timestamp(const std::string& text) {
    // YYYY-MM-DD[T ]HH:MM:SS[Z]
    std::string s = text;
    if (!s.empty() && s.back() == 'Z') s.pop_back();
    const bool ok = s.size() == 19 && all_digits(s, 0, 4) && s[4] == '-' && all_digits(s, 5, 2) &&
                    s[7] == '-' && all_digits(s, 8, 2) && (s[10] == 'T' || s[10] == ' ') &&
                    all_digits(s, 11, 2) && s[13] == ':' && all_digits(s, 14, 2) && s[16] == ':' &&
                    all_digits(s, 17, 2);
    if (!ok) throw Error("invalid timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
    UtcParts p;
    p.year = num(s, 0, 4);
    p.month = num(s, 5, 2);
    p.day = num(s, 8, 2);
    p.hour = num(s, 11, 2);
    p.minute = num(s, 14, 2);
    p.second = num(s, 17, 2);
    if (p.month < 1 || p.month > 12 || p.day < 1 || p.day > 31 || p.hour > 23 || p.minute > 59 ||
        p.second > 59) {
        throw Error("invalid timestamp '" + text + "' (field out of range)");
    }
    return epoch_from_parts(p);
}

std::string format_timestamp(std::int64_t t) {
    const UtcParts p = parts_from_epoch(t);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", p.year, p.month, p.day,
                  p.hour, p.minute, p.second);
    return buf;
}

} // namespace h2lca
