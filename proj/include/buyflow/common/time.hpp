#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace buyflow {

using Timestamp = std::int64_t;  // UTC epoch seconds

inline constexpr std::int64_t kSecondsPerDay = 86400;

struct CivilDate {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
};

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM", "YYYY-MM-DD HH:MM:SS" (or 'T' as
// the separator). Returns nullopt for anything malformed or for an impossible
// calendar date such as 2014-02-31.
std::optional<Timestamp> parse_utc(std::string_view text);

// "YYYY-MM-DD HH:MM:SS"
std::string format_utc(Timestamp ts);

Timestamp from_civil(const CivilDate& date);
CivilDate to_civil(Timestamp ts);

// Whole days since the epoch, rounding toward negative infinity.
std::int64_t day_number(Timestamp ts);

// 0 = Monday ... 6 = Sunday, for a day number.
int weekday_of_day(std::int64_t day);

// Adds calendar months, clamping the day of month.
Timestamp add_months(Timestamp ts, int months);

// First instant of the month containing ts.
Timestamp month_start(Timestamp ts);

}  // namespace buyflow
