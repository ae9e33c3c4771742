#include "buyflow/common/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace buyflow {

namespace {

using namespace std::chrono;

bool read_int(std::string_view s, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  std::from_chars(s.data() + pos, s.data() + pos + width, out);
  return true;
}

}  // namespace

std::optional<Timestamp> parse_utc(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() < 10 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) ||
      text[7] != '-' || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  if (text.size() > 10) {
    if ((text[10] != ' ' && text[10] != 'T') || text.size() < 16 || !read_int(text, 11, 2, h) ||
        text[13] != ':' || !read_int(text, 14, 2, mi)) {
      return std::nullopt;
    }
    if (text.size() > 16) {
      if (text.size() != 19 || text[16] != ':' || !read_int(text, 17, 2, s)) return std::nullopt;
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

std::string format_utc(Timestamp ts) {
  const std::int64_t dn = day_number(ts);
  const std::int64_t sod = ts - dn * kSecondsPerDay;
  const year_month_day ymd{sys_days{days{dn}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(sod / 3600), static_cast<long long>(sod / 60 % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

Timestamp from_civil(const CivilDate& date) {
  const year_month_day ymd{year{date.year}, month{date.month}, day{date.day}};
  return sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay;
}

CivilDate to_civil(Timestamp ts) {
  const year_month_day ymd{sys_days{days{day_number(ts)}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

std::int64_t day_number(Timestamp ts) {
  return ts >= 0 ? ts / kSecondsPerDay : -((-ts + kSecondsPerDay - 1) / kSecondsPerDay);
}

int weekday_of_day(std::int64_t day) {
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  return static_cast<int>(((day % 7) + 7 + 3) % 7);
}

Timestamp add_months(Timestamp ts, int months) {
  const std::int64_t dn = day_number(ts);
  const std::int64_t sod = ts - dn * kSecondsPerDay;
  year_month_day ymd{sys_days{days{dn}}};
  const year_month_day shifted = ymd + std::chrono::months{months};
  year_month_day fixed = shifted;
  if (!shifted.ok()) fixed = shifted.year() / shifted.month() / last;
  return sys_days{fixed}.time_since_epoch().count() * kSecondsPerDay + sod;
}

Timestamp month_start(Timestamp ts) {
  const CivilDate c = to_civil(ts);
  return from_civil({c.year, c.month, 1});
}

}  // namespace buyflow
