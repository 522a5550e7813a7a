#include "intentflow/schedule/scheduler.hpp"

#include "intentflow/error.hpp"
#include "intentflow/exec/value.hpp"
#include "intentflow/schedule/recurrence.hpp"

#include <json.hpp>

#include <iostream>

namespace intentflow::schedule {

Scheduler::Scheduler(SchedulerHooks hooks, std::filesystem::path state_file, Clock clock)
    : hooks_(std::move(hooks)), state_file_(std::move(state_file)), clock_(std::move(clock)) {}

model::Schedule Scheduler::schedule(const std::string& workflow_id, const std::string& expression,
                                    const std::string& timezone) {
  model::Schedule s;
  hooks_.update(workflow_id, [&](model::Workflow& wf) {
    const auto problems = hooks_.readiness_problems(wf);
    if (!problems.empty()) {
      throw Error(ErrorCode::not_ready, "workflow " + workflow_id + " is not ready to schedule",
                  {{"problems", problems}});
    }
    const Recurrence r = Recurrence::parse(expression);
    const auto tz = Timezone::load(timezone);
    s = model::Schedule{expression, timezone, next_fire(r, *tz, clock_())};
    wf.schedule = s;
  });
  return s;
}

void Scheduler::unschedule(const std::string& workflow_id) {
  hooks_.update(workflow_id, [](model::Workflow& wf) { wf.schedule.reset(); });
}

std::optional<Timestamp> Scheduler::last_tick() const {
  std::error_code ec;
  if (!std::filesystem::exists(state_file_, ec)) return std::nullopt;
  const auto j = nlohmann::json::parse(exec::read_file(state_file_), nullptr, false);
  if (!j.is_object() || !j.contains("last_tick") || !j["last_tick"].is_string()) return std::nullopt;
  return parse_utc(j["last_tick"].get<std::string>());
}

TickResult Scheduler::tick(Timestamp now) {
  std::unique_lock lock(tick_mutex_, std::try_to_lock);
  if (!lock.owns_lock()) throw Error(ErrorCode::conflict, "a scheduler tick is already in progress");
  if (auto last = last_tick(); last && now < *last) {
    throw Error(ErrorCode::bad_request, "tick time " + format_utc(now) + " precedes previous tick " + format_utc(*last));
  }

  TickResult result;
  for (model::Workflow wf : hooks_.list()) {
    if (!wf.schedule || wf.schedule->next_fire > now) continue;
    if (hooks_.is_running(wf.id)) {
      std::clog << "scheduler: skipping " << wf.id << ", previous run still in progress\n";
      result.skipped.push_back(wf.id);
    } else {
      try {
        result.started.push_back(hooks_.start_run(wf));
      } catch (const Error& e) {
        std::clog << "scheduler: run of " << wf.id << " not started: " << e.what() << "\n";
        result.failed.push_back(wf.id);
      }
    }
    // The run writes the workflow too (status, outputs), so advance on the
    // stored copy.
    try {
      hooks_.update(wf.id, [&](model::Workflow& stored) {
        if (stored.schedule) stored.schedule->next_fire = next_fire(stored.schedule->expression, stored.schedule->timezone, now);
      });
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_found) throw;
    }
  }

  nlohmann::json state{{"last_tick", format_utc(now)}};
  exec::write_file_atomic(state_file_, state.dump(2) + "\n");
  return result;
}

}  // namespace intentflow::schedule
