#include "intentflow/schedule/timezone.hpp"

#include "intentflow/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace intentflow::schedule {

using namespace std::chrono;

namespace {

[[noreturn]] void bad_zone(const std::string& msg) { throw Error(ErrorCode::invalid_timezone, msg); }

class Cursor {
public:
  explicit Cursor(std::string_view s) : s_(s) {}
  bool done() const { return i_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[i_]; }
  char take() { return done() ? '\0' : s_[i_++]; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++i_;
    return true;
  }
  int number(int max_digits) {
    int v = 0;
    int n = 0;
    while (n < max_digits && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (take() - '0');
      ++n;
    }
    if (n == 0) fail("expected a number");
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    bad_zone("invalid POSIX TZ rule \"" + std::string(s_) + "\": " + what);
  }

private:
  std::string_view s_;
  std::size_t i_ = 0;
};

std::string abbreviation(Cursor& c) {
  std::string out;
  if (c.accept('<')) {
    while (!c.done() && c.peek() != '>') out.push_back(c.take());
    if (!c.accept('>')) c.fail("unterminated <abbreviation>");
  } else {
    while (std::isalpha(static_cast<unsigned char>(c.peek()))) out.push_back(c.take());
  }
  if (out.size() < 3) c.fail("abbreviation too short");
  return out;
}

/// [+-]hh[:mm[:ss]] in seconds.
std::int32_t clock_time(Cursor& c) {
  int sign = 1;
  if (c.accept('-')) sign = -1;
  else c.accept('+');
  std::int32_t v = c.number(3) * 3600;
  if (c.accept(':')) {
    v += c.number(2) * 60;
    if (c.accept(':')) v += c.number(2);
  }
  return sign * v;
}

PosixRule::DateRule date_rule(Cursor& c) {
  PosixRule::DateRule r;
  if (c.accept('M')) {
    r.form = PosixRule::DateRule::Form::month_week_day;
    r.month = c.number(2);
    if (!c.accept('.')) c.fail("expected '.'");
    r.week = c.number(1);
    if (!c.accept('.')) c.fail("expected '.'");
    r.day = c.number(1);
    if (r.month < 1 || r.month > 12 || r.week < 1 || r.week > 5 || r.day > 6) c.fail("date rule out of range");
  } else if (c.accept('J')) {
    r.form = PosixRule::DateRule::Form::julian1;
    r.day = c.number(3);
    if (r.day < 1 || r.day > 365) c.fail("julian day out of range");
  } else {
    r.form = PosixRule::DateRule::Form::julian0;
    r.day = c.number(3);
    if (r.day > 365) c.fail("day out of range");
  }
  if (c.accept('/')) r.time = clock_time(c);
  return r;
}

/// Days since the epoch of a rule's date in `y`.
std::int64_t rule_day(const PosixRule::DateRule& r, int y) {
  const year yr{y};
  switch (r.form) {
    case PosixRule::DateRule::Form::julian1: {
      int doy = r.day - 1;
      if (yr.is_leap() && r.day >= 60) ++doy;
      return (sys_days{yr / January / 1} + days{doy}).time_since_epoch().count();
    }
    case PosixRule::DateRule::Form::julian0:
      return (sys_days{yr / January / 1} + days{r.day}).time_since_epoch().count();
    case PosixRule::DateRule::Form::month_week_day: {
      const sys_days first{yr / month(static_cast<unsigned>(r.month)) / 1};
      const unsigned wd = weekday{first}.c_encoding();
      sys_days d = first + days{(r.day - static_cast<int>(wd) + 7) % 7} + days{(r.week - 1) * 7};
      const sys_days last{yr / month(static_cast<unsigned>(r.month)) / std::chrono::last};
      while (d > last) d -= days{7};
      return d.time_since_epoch().count();
    }
  }
  return 0;
}

int year_of(std::int64_t seconds) {
  const auto d = floor<days>(sys_seconds{std::chrono::seconds{seconds}});
  return static_cast<int>(year_month_day{d}.year());
}

std::int64_t be(std::string_view b, std::size_t at, std::size_t n) {
  if (at + n > b.size()) bad_zone("truncated TZif data");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  if (n == 4) return static_cast<std::int32_t>(static_cast<std::uint32_t>(v));
  return static_cast<std::int64_t>(v);
}

}  // namespace

PosixRule PosixRule::parse(std::string_view text) {
  Cursor c(text);
  PosixRule r;
  r.std_abbr = abbreviation(c);
  r.std_offset = -clock_time(c);
  if (c.done()) return r;
  r.dst_abbr = abbreviation(c);
  r.dst_offset = r.std_offset + 3600;
  if (!c.done() && c.peek() != ',') r.dst_offset = -clock_time(c);
  if (c.done()) {
    r.start = {DateRule::Form::month_week_day, 0, 3, 2, 7200};
    r.end = {DateRule::Form::month_week_day, 0, 11, 1, 7200};
    return r;
  }
  if (!c.accept(',')) c.fail("expected ','");
  r.start = date_rule(c);
  if (!c.accept(',')) c.fail("expected ','");
  r.end = date_rule(c);
  if (!c.done()) c.fail("trailing characters");
  return r;
}

std::int32_t PosixRule::offset_at(std::int64_t utc) const {
  if (!dst_abbr) return std_offset;
  const int y = year_of(utc + std_offset);
  const std::int64_t start_utc = rule_day(start, y) * 86400 + start.time - std_offset;
  const std::int64_t end_utc = rule_day(end, y) * 86400 + end.time - dst_offset;
  bool dst;
  if (start_utc < end_utc) {
    dst = utc >= start_utc && utc < end_utc;
  } else {
    dst = !(utc >= end_utc && utc < start_utc);
  }
  return dst ? dst_offset : std_offset;
}

// ---------------------------------------------------------------------------

Timezone Timezone::from_tzif(std::string name, std::string_view b) {
  if (b.size() < 44 || b.substr(0, 4) != "TZif") bad_zone("\"" + name + "\" is not a TZif file");
  Timezone tz;
  tz.name_ = std::move(name);

  auto counts = [&](std::size_t at) {
    std::array<std::size_t, 6> c{};
    for (std::size_t i = 0; i < 6; ++i) c[i] = static_cast<std::size_t>(be(b, at + 20 + i * 4, 4));
    return c;  // isutcnt, isstdcnt, leapcnt, timecnt, typecnt, charcnt
  };

  const char version = b[4];
  std::size_t header = 0;
  std::size_t time_size = 4;
  auto c = counts(0);
  if (version >= '2') {
    const std::size_t v1 = c[3] * 4 + c[3] + c[4] * 6 + c[5] + c[2] * 8 + c[1] + c[0];
    header = 44 + v1;
    if (b.substr(header, 4) != "TZif") bad_zone("missing second TZif header");
    c = counts(header);
    time_size = 8;
  }
  const std::size_t timecnt = c[3], typecnt = c[4], charcnt = c[5], leapcnt = c[2];
  if (typecnt == 0) bad_zone("TZif file without local time types");
  std::size_t p = header + 44;
  for (std::size_t i = 0; i < timecnt; ++i) tz.transitions_.push_back(be(b, p + i * time_size, time_size));
  p += timecnt * time_size;
  for (std::size_t i = 0; i < timecnt; ++i) {
    const auto t = static_cast<std::uint8_t>(be(b, p + i, 1));
    if (t >= typecnt) bad_zone("transition type out of range");
    tz.transition_types_.push_back(t);
  }
  p += timecnt;
  for (std::size_t i = 0; i < typecnt; ++i) {
    Type t;
    t.offset = static_cast<std::int32_t>(be(b, p + i * 6, 4));
    t.dst = be(b, p + i * 6 + 4, 1) != 0;
    tz.types_.push_back(t);
  }
  p += typecnt * 6 + charcnt + leapcnt * (time_size + 4) + c[1] + c[0];

  if (version >= '2' && p < b.size() && b[p] == '\n') {
    const auto end = b.find('\n', p + 1);
    if (end != std::string_view::npos && end > p + 1) tz.footer_ = PosixRule::parse(b.substr(p + 1, end - p - 1));
  }
  return tz;
}

std::shared_ptr<const Timezone> Timezone::load(std::string_view name) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const Timezone>, std::less<>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(name); it != cache.end()) return it->second;

  const std::string n(name);
  auto valid_char = [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '/' || ch == '_' || ch == '-' || ch == '+';
  };
  if (n.empty() || n.front() == '/' || n.find("..") != std::string::npos || !std::all_of(n.begin(), n.end(), valid_char)) {
    bad_zone("invalid time zone name \"" + n + "\"");
  }

  std::shared_ptr<const Timezone> tz;
  if (n == "UTC" || n == "Etc/UTC" || n == "Z") {
    auto z = std::make_shared<Timezone>();
    z->name_ = n;
    z->types_.push_back({0, false});
    tz = std::move(z);
  } else {
    const char* env = std::getenv("TZDIR");
    const std::filesystem::path root = env && *env ? env : "/usr/share/zoneinfo";
    const auto file = root / n;
    std::ifstream in(file, std::ios::binary);
    if (!in || std::filesystem::is_directory(file)) bad_zone("unknown time zone \"" + n + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    tz = std::make_shared<Timezone>(from_tzif(n, ss.str()));
  }
  cache.emplace(n, tz);
  return tz;
}

std::int32_t Timezone::offset_at(std::int64_t utc) const {
  if (transitions_.empty()) return footer_ ? footer_->offset_at(utc) : types_.front().offset;
  if (utc < transitions_.front()) return types_.front().offset;
  if (footer_ && utc >= transitions_.back()) return footer_->offset_at(utc);
  const auto it = std::upper_bound(transitions_.begin(), transitions_.end(), utc);
  const auto idx = static_cast<std::size_t>(it - transitions_.begin()) - 1;
  return types_[transition_types_[idx]].offset;
}

LocalSeconds Timezone::to_local(Timestamp t) const {
  const std::int64_t utc = t.time_since_epoch().count();
  return LocalSeconds{std::chrono::seconds{utc + offset_at(utc)}};
}

Timestamp Timezone::to_utc(LocalSeconds local) const {
  const std::int64_t l = local.time_since_epoch().count();
  const std::int32_t before = offset_at(l - 86400);
  const std::int32_t after = offset_at(l + 86400);
  std::optional<std::int64_t> best;
  for (std::int32_t off : {before, after}) {
    const std::int64_t u = l - off;
    if (offset_at(u) == off && (!best || u < *best)) best = u;
  }
  if (!best) best = l - before;
  return Timestamp{std::chrono::seconds{*best}};
}

}  // namespace intentflow::schedule
