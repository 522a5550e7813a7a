#include "intentflow/time.hpp"

#include "intentflow/error.hpp"

#include <cstdio>

namespace intentflow {

using namespace std::chrono;

std::string format_utc(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_utc(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char z = 0;
  const std::string copy(text);
  if (copy.size() != 20 ||
      std::sscanf(copy.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h,
                  &mi, &s, &z) != 7 ||
      z != 'Z') {
    throw Error(ErrorCode::parse_error,
                "timestamp must look like YYYY-MM-DDTHH:MM:SSZ: " + copy);
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorCode::parse_error, "timestamp out of range: " + copy);
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

Timestamp system_now() { return floor<seconds>(system_clock::now()); }

}  // namespace intentflow
