#pragma once

#include "intentflow/time.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace intentflow::schedule {

/// Seconds since the epoch of a wall-clock reading, as if it were UTC.
using LocalSeconds = std::chrono::local_seconds;

/// A POSIX TZ rule ("CET-1CEST,M3.5.0,M10.5.0/3"), used past the last
/// transition of a TZif file.
struct PosixRule {
  struct DateRule {
    enum class Form { julian1, julian0, month_week_day } form = Form::month_week_day;
    int day = 0;    // J1..365 / 0..365 / weekday 0..6
    int month = 0;  // 1..12
    int week = 0;   // 1..5 (5 = last)
    std::int32_t time = 7200;  // seconds after local midnight, may be negative
  };

  std::string std_abbr;
  std::int32_t std_offset = 0;  // seconds east of UTC
  std::optional<std::string> dst_abbr;
  std::int32_t dst_offset = 0;
  DateRule start;
  DateRule end;

  /// Errors: invalid_timezone.
  static PosixRule parse(std::string_view text);
  std::int32_t offset_at(std::int64_t utc) const;
};

/// Offsets of an IANA zone read from a TZif (v1-v4) file.
class Timezone {
public:
  /// Looks the name up under $TZDIR or /usr/share/zoneinfo ("UTC" is
  /// built in). Errors: invalid_timezone.
  static std::shared_ptr<const Timezone> load(std::string_view name);
  /// Errors: invalid_timezone.
  static Timezone from_tzif(std::string name, std::string_view bytes);

  const std::string& name() const { return name_; }

  /// UTC offset in seconds at an instant.
  std::int32_t offset_at(std::int64_t utc) const;
  LocalSeconds to_local(Timestamp t) const;

  /// Instant of a wall-clock time. A time inside a spring-forward gap is
  /// read with the offset before the gap (so it lands after the gap); a
  /// repeated time in a fall-back overlap maps to its earlier instant.
  Timestamp to_utc(LocalSeconds local) const;

private:
  struct Type {
    std::int32_t offset = 0;
    bool dst = false;
  };

  std::string name_;
  std::vector<std::int64_t> transitions_;
  std::vector<std::uint8_t> transition_types_;
  std::vector<Type> types_;
  std::optional<PosixRule> footer_;
};

}  // namespace intentflow::schedule
