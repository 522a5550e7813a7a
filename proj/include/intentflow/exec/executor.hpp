#pragma once

#include "intentflow/actions/pool.hpp"
#include "intentflow/exec/builtins.hpp"
#include "intentflow/exec/events.hpp"
#include "intentflow/ids.hpp"
#include "intentflow/model/workflow.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace intentflow::exec {

enum class RunStatus { running, succeeded, failed };

std::string_view to_string(RunStatus s);
std::optional<RunStatus> parse_run_status(std::string_view s);

struct Run {
  std::string id;
  std::string workflow_id;
  RunStatus status = RunStatus::running;
  Timestamp started_at{};
  std::optional<Timestamp> ended_at;
  std::vector<model::StepOutput> step_results;

  bool operator==(const Run&) const = default;
};

nlohmann::json to_json(const Run& r);
Run run_from_json(const nlohmann::json& j);

/// Reasons the workflow cannot run: validation violations, unresolved
/// capsules, missing bindings, unknown actions, and required parameters
/// that are unbound on the first step. Empty = ready.
std::vector<std::string> readiness_problems(const model::Workflow& wf, const std::vector<actions::ActionDescriptor>& pool);

/// A run that has been admitted (single-flight claimed, log open) but not
/// yet executed.
struct RunHandle {
  Run run;
  std::shared_ptr<EventLog> log;
};

/// Sequential, fail-fast workflow runner. Layout under the data directory:
///   runs/<run_id>/run.json, runs/<run_id>/events.jsonl,
///   runs/<run_id>/steps/<index>/<content-hash>.<ext>, outbox/<run_id>-<seq>.eml
class Executor {
public:
  Executor(std::filesystem::path data_dir, std::shared_ptr<actions::ActionPool> pool, Clock clock,
           std::shared_ptr<IdGenerator> ids, HttpHooks http = {});

  /// Checks readiness and claims the workflow. Errors: not_ready,
  /// run_in_progress.
  std::shared_ptr<RunHandle> admit(const model::Workflow& wf);

  /// Executes an admitted run to completion and releases the claim.
  /// Never throws for step failures; they end the run as failed.
  Run execute(const std::shared_ptr<RunHandle>& handle, const model::Workflow& wf);

  /// admit + execute.
  Run run(const model::Workflow& wf);

  /// Live log of a run started by this executor, if still known.
  std::shared_ptr<EventLog> live_log(const std::string& run_id) const;

  /// Persisted run document. Errors: not_found.
  Run load_run(const std::string& run_id) const;
  std::filesystem::path events_file(const std::string& run_id) const;
  std::filesystem::path outbox_dir() const;

  bool is_running(const std::string& workflow_id) const;

  /// Value of a stored output.
  Value load_output(const model::StepOutput& out) const;

private:
  void persist(const Run& r) const;
  Value execute_step(const model::Workflow& wf, std::size_t i, const std::vector<std::optional<Value>>& outputs,
                     const Run& run, std::uint64_t event_seq) const;
  model::StepOutput store_output(const Run& run, std::size_t i, const Value& v) const;

  std::filesystem::path data_dir_;
  std::shared_ptr<actions::ActionPool> pool_;
  Clock clock_;
  std::shared_ptr<IdGenerator> ids_;
  HttpHooks http_;

  mutable std::mutex mutex_;
  std::set<std::string> active_;
  std::map<std::string, std::shared_ptr<EventLog>> logs_;
};

}  // namespace intentflow::exec
