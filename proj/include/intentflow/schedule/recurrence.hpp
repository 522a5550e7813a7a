#pragma once

#include "intentflow/schedule/timezone.hpp"

#include <bitset>
#include <string>
#include <string_view>

namespace intentflow::schedule {

/// A parsed recurrence. Accepted forms:
///   daily@HH:MM
///   weekly <DAY>@HH:MM        DAY = Mon..Sun or full name, any case
///   5-field cron              minute hour day-of-month month day-of-week
/// Cron fields take *, lists, ranges and /steps; day of week 0-7 with 0
/// and 7 both Sunday. When both day fields are restricted a day matching
/// either fires (classic cron).
struct Recurrence {
  std::bitset<60> minutes;
  std::bitset<24> hours;
  std::bitset<32> days_of_month;  // 1..31
  std::bitset<13> months;         // 1..12
  std::bitset<7> weekdays;        // 0 = Sunday
  bool dom_restricted = false;
  bool dow_restricted = false;

  /// Errors: invalid_expression.
  static Recurrence parse(std::string_view expression);
  bool matches_day(std::chrono::year_month_day d) const;
};

/// Smallest instant strictly after `after` whose wall-clock time in `tz`
/// matches. Errors: invalid_expression when nothing matches within eight
/// years (e.g. "0 0 31 2 *").
Timestamp next_fire(const Recurrence& r, const Timezone& tz, Timestamp after);

/// Parses both and computes. Errors: invalid_expression, invalid_timezone.
Timestamp next_fire(std::string_view expression, std::string_view timezone, Timestamp after);

}  // namespace intentflow::schedule
