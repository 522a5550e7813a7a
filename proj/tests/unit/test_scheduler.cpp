#include "intentflow/schedule/recurrence.hpp"
#include "intentflow/schedule/scheduler.hpp"
#include "intentflow/schedule/timezone.hpp"
#include "support.hpp"

#include <doctest.h>

#include <ctime>
#include <future>
#include <map>
#include <random>
#include <set>
#include <thread>

using namespace intentflow;
using namespace intentflow::schedule;
using testing::ts;

TEST_SUITE("recurrence") {
  TEST_CASE("next_fire matches the minute-enumeration goldens") {
    for (const auto& c : testing::fixture_json("oracles/next_fire.json")) {
      CAPTURE(c.dump());
      CHECK(format_utc(next_fire(c["expression"].get<std::string>(), c["timezone"].get<std::string>(),
                                 parse_utc(c["after"].get<std::string>()))) == c["next_fire"]);
    }
  }

  TEST_CASE("strictly after the given instant") {
    const auto wed = ts("2026-03-25T08:00:00Z");  // Wed 09:00 CET
    CHECK(next_fire("weekly Wed@09:00", "Europe/Berlin", wed) == ts("2026-04-01T07:00:00Z"));
    CHECK(next_fire("weekly Wed@09:00", "Europe/Berlin", wed - std::chrono::seconds(1)) == wed);
  }

  TEST_CASE("a time inside the spring-forward gap fires just after it") {
    // 02:30 does not exist in Berlin on 2026-03-29; read with the winter
    // offset it is 01:30Z, i.e. 03:30 summer time.
    CHECK(next_fire("30 2 * * *", "Europe/Berlin", ts("2026-03-28T12:00:00Z")) == ts("2026-03-29T01:30:00Z"));
  }

  TEST_CASE("a repeated time in the fall-back overlap fires once") {
    const auto first = next_fire("30 2 * * *", "Europe/Berlin", ts("2026-10-24T12:00:00Z"));
    CHECK(first == ts("2026-10-25T00:30:00Z"));
    CHECK(next_fire("30 2 * * *", "Europe/Berlin", first) == ts("2026-10-26T01:30:00Z"));
  }

  TEST_CASE("cron forms") {
    const auto r = Recurrence::parse("*/15 9-17 * * mon-fri");
    CHECK(r.minutes.count() == 4);
    CHECK(r.hours.count() == 9);
    CHECK(r.weekdays.count() == 5);
    CHECK_FALSE(r.dom_restricted);
    // both day fields restricted: either matches
    CHECK(next_fire("0 12 13 * 5", "UTC", ts("2026-03-01T00:00:00Z")) == ts("2026-03-06T12:00:00Z"));
    CHECK(next_fire("0 0 29 2 *", "UTC", ts("2026-03-01T00:00:00Z")) == ts("2028-02-29T00:00:00Z"));
    CHECK(Recurrence::parse("0 0 * * 7").weekdays == Recurrence::parse("0 0 * * 0").weekdays);
  }

  TEST_CASE("bad expressions and zones") {
    for (const char* e : {"", "daily@25:00", "weekly Funday@09:00", "daily@9", "* * * *", "61 * * * *",
                          "0 0 31 2 *"}) {
      CAPTURE(e);
      CHECK_ERROR_CODE(next_fire(e, "UTC", ts("2026-01-01T00:00:00Z")), ErrorCode::invalid_expression);
    }
    CHECK_ERROR_CODE(next_fire("daily@09:00", "Mars/Olympus", ts("2026-01-01T00:00:00Z")),
                     ErrorCode::invalid_timezone);
    CHECK_ERROR_CODE(Timezone::load("../etc/passwd"), ErrorCode::invalid_timezone);
  }
}

TEST_SUITE("timezone") {
  TEST_CASE("offsets agree with the C library") {
    for (const char* zone : {"Europe/Berlin", "America/New_York", "Australia/Sydney", "Asia/Kolkata"}) {
      CAPTURE(zone);
      const auto tz = Timezone::load(zone);
      ::setenv("TZ", zone, 1);
      ::tzset();
      // every 5 hours over 2025-2040, past the end of the transition tables
      for (std::int64_t t = 1735689600; t < 2240524800; t += 5 * 3600 + 17) {
        std::tm tm{};
        const std::time_t tt = t;
        ::localtime_r(&tt, &tm);
        if (tz->offset_at(t) != tm.tm_gmtoff) {
          CHECK_MESSAGE(false, "offset mismatch at " << t);
          break;
        }
      }
    }
    ::unsetenv("TZ");
    ::tzset();
  }

  TEST_CASE("POSIX rules") {
    const auto r = PosixRule::parse("CET-1CEST,M3.5.0,M10.5.0/3");
    CHECK(r.std_offset == 3600);
    CHECK(r.dst_offset == 7200);
    CHECK(r.offset_at(ts("2026-07-01T00:00:00Z").time_since_epoch().count()) == 7200);
    CHECK(r.offset_at(ts("2026-01-01T00:00:00Z").time_since_epoch().count()) == 3600);
    CHECK(PosixRule::parse("<+0530>-5:30").std_offset == 19800);
    CHECK_ERROR_CODE(PosixRule::parse("???"), ErrorCode::invalid_timezone);
  }

  TEST_CASE("UTC is built in") { CHECK(Timezone::load("UTC")->offset_at(0) == 0); }
}

namespace {

/// In-memory store standing in for the service.
struct Store {
  std::map<std::string, model::Workflow> workflows;
  std::vector<std::string> started;
  std::set<std::string> running;
  std::set<std::string> refuse;
  std::function<void()> on_start;

  SchedulerHooks hooks() {
    SchedulerHooks h;
    h.update = [this](const std::string& id, const std::function<void(model::Workflow&)>& change) {
      auto it = workflows.find(id);
      if (it == workflows.end()) throw Error(ErrorCode::not_found, id);
      model::Workflow w = it->second;
      change(w);
      it->second = w;
    };
    h.list = [this] {
      std::vector<model::Workflow> out;
      for (auto& [_, w] : workflows) out.push_back(w);
      return out;
    };
    h.readiness_problems = [](const model::Workflow& w) {
      return w.title == "broken" ? std::vector<std::string>{"unbound"} : std::vector<std::string>{};
    };
    h.is_running = [this](const std::string& id) { return running.count(id) > 0; };
    h.start_run = [this](const model::Workflow& w) {
      if (on_start) on_start();
      if (refuse.count(w.id)) throw Error(ErrorCode::not_ready, "refused");
      started.push_back(w.id);
      return "run_" + std::to_string(started.size());
    };
    return h;
  }

  void add(const std::string& id, const std::string& title = "ok") {
    model::Workflow w;
    w.id = id;
    w.title = title;
    workflows[id] = w;
  }
};

struct SchedRig {
  testing::TempDir dir;
  testing::ManualClock clock;
  Store store;
  std::unique_ptr<Scheduler> s;

  SchedRig() {
    clock.set(ts("2026-03-24T09:00:00Z"));  // Tue 10:00 in Berlin
    store.add("wf_a");
    s = std::make_unique<Scheduler>(store.hooks(), dir / "scheduler.json", clock.clock());
  }
};

}  // namespace

TEST_SUITE("scheduler") {
  TEST_CASE("schedule computes next_fire from now") {
    SchedRig r;
    const auto sch = r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    CHECK(sch.next_fire == ts("2026-03-25T08:00:00Z"));
    CHECK(r.store.workflows["wf_a"].schedule == sch);
  }

  TEST_CASE("tick before next_fire starts nothing") {
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    const auto t = r.s->tick(ts("2026-03-25T07:59:59Z"));
    CHECK(t.started.empty());
    CHECK(r.store.started.empty());
  }

  TEST_CASE("missed windows coalesce into one catch-up run") {
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    // Two windows (25th and 26th at 08:00Z) pass unobserved.
    const auto now = ts("2026-03-26T12:00:00Z");
    const auto t = r.s->tick(now);
    CHECK(t.started.size() == 1);
    CHECK(r.store.started == std::vector<std::string>{"wf_a"});
    CHECK(r.store.workflows["wf_a"].schedule->next_fire == ts("2026-03-27T08:00:00Z"));
    CHECK(r.s->tick(now).started.empty());
  }

  TEST_CASE("clock jumps against the coalescing rule") {
    // Simulated clock: random jumps; expected runs = number of ticks whose
    // interval (prev, now] contains at least one fire time.
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    std::mt19937 rng(11);
    auto now = ts("2026-03-24T09:00:00Z");
    auto next = ts("2026-03-25T08:00:00Z");
    std::size_t expected = 0;
    for (int i = 0; i < 200; ++i) {
      now += std::chrono::seconds(std::uniform_int_distribution<int>(60, 3 * 86400)(rng));
      if (next <= now) {
        ++expected;
        next = next_fire("daily@09:00", "Europe/Berlin", now);
      }
      r.s->tick(now);
      CHECK(r.store.workflows["wf_a"].schedule->next_fire == next);
    }
    CHECK(r.store.started.size() == expected);
  }

  TEST_CASE("unschedule stops firing") {
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    r.s->unschedule("wf_a");
    CHECK_FALSE(r.store.workflows["wf_a"].schedule);
    CHECK(r.s->tick(ts("2026-04-30T00:00:00Z")).started.empty());
  }

  TEST_CASE("a still-running workflow is skipped but advanced") {
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    r.store.running.insert("wf_a");
    const auto t = r.s->tick(ts("2026-03-25T09:00:00Z"));
    CHECK(t.skipped == std::vector<std::string>{"wf_a"});
    CHECK(r.store.workflows["wf_a"].schedule->next_fire == ts("2026-03-26T08:00:00Z"));
  }

  TEST_CASE("admission failure is reported") {
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    r.store.refuse.insert("wf_a");
    CHECK(r.s->tick(ts("2026-03-25T09:00:00Z")).failed == std::vector<std::string>{"wf_a"});
  }

  TEST_CASE("time must not go backwards, across restarts too") {
    SchedRig r;
    r.s->tick(ts("2026-03-25T00:00:00Z"));
    CHECK_ERROR_CODE(r.s->tick(ts("2026-03-24T23:59:59Z")), ErrorCode::bad_request);
    Scheduler again(r.store.hooks(), r.dir / "scheduler.json", r.clock.clock());
    CHECK(again.last_tick() == ts("2026-03-25T00:00:00Z"));
    CHECK_ERROR_CODE(again.tick(ts("2026-03-24T00:00:00Z")), ErrorCode::bad_request);
  }

  TEST_CASE("concurrent ticks conflict") {
    SchedRig r;
    r.s->schedule("wf_a", "daily@09:00", "Europe/Berlin");
    std::promise<void> entered;
    std::promise<void> release;
    auto release_f = release.get_future().share();
    r.store.on_start = [&] {
      entered.set_value();
      release_f.wait();
    };
    std::thread first([&] { r.s->tick(ts("2026-03-25T09:00:00Z")); });
    entered.get_future().wait();
    CHECK_ERROR_CODE(r.s->tick(ts("2026-03-25T09:00:00Z")), ErrorCode::conflict);
    release.set_value();
    first.join();
    CHECK(r.store.started.size() == 1);
  }

  TEST_CASE("only ready workflows can be scheduled") {
    SchedRig r;
    r.store.add("wf_b", "broken");
    CHECK_ERROR_CODE(r.s->schedule("wf_b", "daily@09:00", "UTC"), ErrorCode::not_ready);
    CHECK_ERROR_CODE(r.s->schedule("wf_zzz", "daily@09:00", "UTC"), ErrorCode::not_found);
    CHECK_ERROR_CODE(r.s->schedule("wf_a", "daily@9am", "UTC"), ErrorCode::invalid_expression);
  }
}
