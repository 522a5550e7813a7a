#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace intentflow {

using Timestamp = std::chrono::sys_seconds;

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(Timestamp t);

/// Parses the format produced by format_utc. Throws Error(parse_error).
Timestamp parse_utc(std::string_view text);

/// Injectable wall clock; defaults to the system clock truncated to seconds.
using Clock = std::function<Timestamp()>;

Timestamp system_now();

}  // namespace intentflow
