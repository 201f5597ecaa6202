#pragma once

#include <cstdint>
#include <string>

namespace h2lca {

/// Calendar date/time in UTC, second resolution.
struct UtcParts {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
};

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

std::int64_t epoch_from_parts(const UtcParts& p);
UtcParts parts_from_epoch(std::int64_t t);

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (strict) to epoch seconds.
/// A space may stand in for 'T' and the trailing 'Z' may be omitted,
/// which covers the common provider exports; offsets are rejected.
std::int64_t parse_timestamp(const std::string& text);

/// Canonical "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(std::int64_t t);

inline bool hour_aligned(std::int64_t t) { return t % 3600 == 0; }

} // namespace h2lca
