#include "intentflow/schedule/recurrence.hpp"

#include "intentflow/error.hpp"
#include "intentflow/text/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>
#include <sstream>
#include <vector>

namespace intentflow::schedule {

using namespace std::chrono;

namespace {

[[noreturn]] void bad_expr(std::string_view expr, const std::string& why) {
  throw Error(ErrorCode::invalid_expression, "invalid schedule expression \"" + std::string(expr) + "\": " + why);
}

std::optional<int> day_name(const std::string& s) {
  static const char* names[] = {"sunday", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday"};
  for (int i = 0; i < 7; ++i) {
    const std::string full = names[i];
    if (s == full || (s.size() >= 3 && full.rfind(s, 0) == 0)) return i;
  }
  return std::nullopt;
}

std::optional<int> month_name(const std::string& s) {
  static const char* names[] = {"jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  for (int i = 0; i < 12; ++i) {
    if (s == names[i]) return i + 1;
  }
  return std::nullopt;
}

void set_time(Recurrence& r, std::string_view expr, const std::string& hh, const std::string& mm) {
  const int h = std::stoi(hh);
  const int m = std::stoi(mm);
  if (h > 23 || m > 59) bad_expr(expr, "time of day out of range");
  r.hours.set(static_cast<std::size_t>(h));
  r.minutes.set(static_cast<std::size_t>(m));
}

enum class FieldKind { minute, hour, dom, month, dow };

/// Expands one cron field into the values it allows.
std::vector<int> expand(std::string_view expr, const std::string& field, int lo, int hi, FieldKind kind) {
  auto value = [&](const std::string& tok) -> int {
    if (!tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      if (tok.size() > 4) bad_expr(expr, "number too large in \"" + field + "\"");
      return std::stoi(tok);
    }
    std::optional<int> named;
    if (kind == FieldKind::month) named = month_name(tok);
    if (kind == FieldKind::dow && tok.size() == 3) named = day_name(tok);
    if (!named) bad_expr(expr, "bad value \"" + tok + "\"");
    return *named;
  };

  std::vector<int> out;
  std::stringstream ss(field);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) bad_expr(expr, "empty list item");
    int step = 1;
    if (auto slash = item.find('/'); slash != std::string::npos) {
      const std::string s = item.substr(slash + 1);
      if (s.empty() || s.size() > 4 || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        bad_expr(expr, "bad step in \"" + item + "\"");
      }
      step = std::stoi(s);
      if (step == 0) bad_expr(expr, "step must be positive");
      item = item.substr(0, slash);
    }
    int a;
    int b;
    if (item == "*") {
      a = lo;
      b = hi;
    } else if (auto dash = item.find('-'); dash != std::string::npos) {
      a = value(item.substr(0, dash));
      b = value(item.substr(dash + 1));
    } else {
      a = value(item);
      b = step > 1 ? hi : a;
    }
    if (a < lo || b > hi || a > b) bad_expr(expr, "value out of range in \"" + field + "\"");
    for (int v = a; v <= b; v += step) out.push_back(v);
  }
  return out;
}

}  // namespace

Recurrence Recurrence::parse(std::string_view expression) {
  const std::string expr = text::to_lower(text::trim(expression));
  if (expr.empty()) bad_expr(expression, "empty");
  Recurrence r;
  static const std::regex daily(R"(^daily\s*@\s*(\d{1,2}):(\d{2})$)");
  static const std::regex weekly(R"(^weekly\s+([a-z]+)\s*@\s*(\d{1,2}):(\d{2})$)");
  std::smatch m;
  if (std::regex_match(expr, m, daily)) {
    set_time(r, expression, m[1].str(), m[2].str());
    r.days_of_month.set();
    r.days_of_month.reset(0);
    r.months.set();
    r.months.reset(0);
    r.weekdays.set();
    return r;
  }
  if (std::regex_match(expr, m, weekly)) {
    auto d = day_name(m[1].str());
    if (!d) bad_expr(expression, "unknown day \"" + m[1].str() + "\"");
    set_time(r, expression, m[2].str(), m[3].str());
    r.days_of_month.set();
    r.days_of_month.reset(0);
    r.months.set();
    r.months.reset(0);
    r.weekdays.set(static_cast<std::size_t>(*d));
    r.dow_restricted = true;
    return r;
  }

  std::vector<std::string> fields;
  {
    std::stringstream ss(expr);
    std::string f;
    while (ss >> f) fields.push_back(f);
  }
  if (fields.size() != 5) bad_expr(expression, "expected daily@HH:MM, weekly <day>@HH:MM or five cron fields");
  for (int v : expand(expression, fields[0], 0, 59, FieldKind::minute)) r.minutes.set(static_cast<std::size_t>(v));
  for (int v : expand(expression, fields[1], 0, 23, FieldKind::hour)) r.hours.set(static_cast<std::size_t>(v));
  for (int v : expand(expression, fields[2], 1, 31, FieldKind::dom)) r.days_of_month.set(static_cast<std::size_t>(v));
  for (int v : expand(expression, fields[3], 1, 12, FieldKind::month)) r.months.set(static_cast<std::size_t>(v));
  for (int v : expand(expression, fields[4], 0, 7, FieldKind::dow)) r.weekdays.set(static_cast<std::size_t>(v % 7));
  r.dom_restricted = fields[2].front() != '*';
  r.dow_restricted = fields[4].front() != '*';
  return r;
}

bool Recurrence::matches_day(year_month_day d) const {
  if (!months.test(static_cast<unsigned>(d.month()))) return false;
  const bool dom = days_of_month.test(static_cast<unsigned>(d.day()));
  const bool dow = weekdays.test(weekday{sys_days{d}}.c_encoding());
  if (dom_restricted && dow_restricted) return dom || dow;
  if (dom_restricted) return dom;
  if (dow_restricted) return dow;
  return true;
}

Timestamp next_fire(const Recurrence& r, const Timezone& tz, Timestamp after) {
  const auto local_after = tz.to_local(after);
  const auto first_day = floor<days>(local_after) - days{1};
  for (int i = 0; i < 8 * 366 + 2; ++i) {
    const auto day = first_day + days{i};
    const year_month_day ymd{sys_days{day.time_since_epoch()}};
    if (!r.matches_day(ymd)) continue;
    std::optional<Timestamp> best;
    for (std::size_t h = 0; h < 24; ++h) {
      if (!r.hours.test(h)) continue;
      for (std::size_t m = 0; m < 60; ++m) {
        if (!r.minutes.test(m)) continue;
        const LocalSeconds local{day + hours{h} + minutes{m}};
        const Timestamp u = tz.to_utc(local);
        if (u > after && (!best || u < *best)) best = u;
      }
    }
    if (best) return *best;
  }
  throw Error(ErrorCode::invalid_expression, "schedule never fires");
}

Timestamp next_fire(std::string_view expression, std::string_view timezone, Timestamp after) {
  const Recurrence r = Recurrence::parse(expression);
  return next_fire(r, *Timezone::load(timezone), after);
}

}  // namespace intentflow::schedule
