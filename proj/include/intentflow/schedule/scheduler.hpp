#pragma once

#include "intentflow/model/workflow.hpp"
#include "intentflow/time.hpp"

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace intentflow::schedule {

/// What the scheduler needs from the workflow store and the executor.
struct SchedulerHooks {
  /// Loads the workflow, applies the change and saves it, with no other
  /// writer in between. Nothing is saved when the change throws.
  /// Errors: not_found.
  std::function<void(const std::string& id, const std::function<void(model::Workflow&)>& change)> update;
  std::function<std::vector<model::Workflow>()> list;
  /// Empty = ready.
  std::function<std::vector<std::string>(const model::Workflow&)> readiness_problems;
  std::function<bool(const std::string& workflow_id)> is_running;
  /// Starts a run and returns its id. Errors as the executor's admit.
  std::function<std::string(const model::Workflow&)> start_run;
};

struct TickResult {
  std::vector<std::string> started;  // run ids
  std::vector<std::string> skipped;  // workflow ids still running from a previous fire
  std::vector<std::string> failed;   // workflow ids whose run could not be admitted
};

class Scheduler {
public:
  /// `state_file` remembers the last tick so monotonicity survives restarts.
  Scheduler(SchedulerHooks hooks, std::filesystem::path state_file, Clock clock);

  /// Errors: not_found, not_ready, invalid_expression, invalid_timezone.
  model::Schedule schedule(const std::string& workflow_id, const std::string& expression, const std::string& timezone);

  /// Errors: not_found.
  void unschedule(const std::string& workflow_id);

  /// Fires every schedule whose next_fire <= now once (missed windows
  /// coalesce into that one run) and advances next_fire past now. A workflow
  /// still running from an earlier fire is skipped but still advanced.
  /// Errors: bad_request when now precedes the previous tick; conflict when
  /// another tick is in progress.
  TickResult tick(Timestamp now);

  std::optional<Timestamp> last_tick() const;

private:
  SchedulerHooks hooks_;
  std::filesystem::path state_file_;
  Clock clock_;
  std::mutex tick_mutex_;
};

}  // namespace intentflow::schedule
