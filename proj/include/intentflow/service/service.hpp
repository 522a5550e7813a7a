#pragma once

#include "intentflow/actions/pool.hpp"
#include "intentflow/agents/gateway.hpp"
#include "intentflow/exec/executor.hpp"
#include "intentflow/ids.hpp"
#include "intentflow/model/workflow.hpp"
#include "intentflow/schedule/scheduler.hpp"
#include "intentflow/suggest/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace intentflow::service {

struct ServiceOptions {
  std::filesystem::path data_dir;
  /// Forces rule-based providers for every role.
  bool offline = true;
  Clock clock = system_now;
  /// Pins generated ids (tests); random when unset.
  std::optional<std::uint64_t> id_seed;
  /// Replaces the network hooks of fetch/http actions.
  std::optional<exec::HttpHooks> http;
  /// Replaces the gateway (tests).
  std::shared_ptr<agents::Gateway> gateway;
};

/// One step-list edit. JSON forms:
///   {"op":"add", "text", "position"?}
///   {"op":"remove", "index"}
///   {"op":"reorder", "from", "to"}
///   {"op":"edit", "index", "text"}
///   {"op":"bind", "index", "action_id", "parameters"?}
struct StepPatch {
  enum class Op { add, remove, reorder, edit, bind } op = Op::add;
  std::size_t index = 0;  // remove/edit/bind target, reorder source
  std::optional<std::size_t> to;  // reorder destination, add position
  std::string text;
  std::string action_id;
  nlohmann::json parameters;

  /// Errors: bad_request.
  static StepPatch from_json(const nlohmann::json& j);
};

/// The directory-backed store plus every module operation, as used by the
/// HTTP router and the CLI. Layout under the data directory:
///   workflows/<id>.json    canonical workflow documents
///   runs/<run_id>/...      run documents, event logs, outputs
///   actions/<id>.json      action manifests (seeded with the defaults)
///   suggestions/           single-use suggestion cache
///   outbox/                mail written by send_email
///   scheduler.json         last tick time
class Service {
public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const std::filesystem::path& data_dir() const { return data_dir_; }
  agents::Gateway& gateway() { return *gateway_; }
  actions::ActionPool& pool() { return *pool_; }
  exec::Executor& executor() { return *executor_; }

  // Suggestions
  suggest::Suggestion suggest(const std::string& prompt);
  suggest::Suggestion get_suggestion(const std::string& id);
  model::Workflow apply(const std::string& suggestion_id);
  std::optional<suggest::Suggestion> reject(const std::string& suggestion_id, const std::optional<std::string>& prompt);

  // Workflows
  std::vector<model::Workflow> list_workflows() const;
  /// Errors: not_found.
  model::Workflow get_workflow(const std::string& id) const;
  /// Stores a new workflow (id generated when empty). Errors: conflict,
  /// validation_failed.
  model::Workflow create_workflow(model::Workflow wf);
  /// Stores the document as-is under `id`, replacing any previous one.
  /// Errors: parse_error, version_mismatch, validation_failed.
  model::Workflow import_workflow(const std::string& id, std::string_view bytes);
  std::string export_workflow(const std::string& id) const;
  void delete_workflow(const std::string& id);

  /// Errors: not_found, bad_request, validation_failed (details carry the
  /// ValidationReport; the stored workflow is unchanged).
  model::Workflow patch_steps(const std::string& id, const StepPatch& patch);
  /// Links a source to a capsule and re-binds that step's parameters.
  /// Errors: not_found (workflow, step or label), bad_request.
  model::Workflow attach_data(const std::string& id, std::size_t step, const std::string& label,
                              const model::DataSource& source);
  /// Errors: as Planner::refine.
  model::Workflow refine(const std::string& id, const std::optional<std::string>& feedback, bool approve);

  model::Schedule schedule(const std::string& id, const std::string& expression, const std::string& timezone);
  void unschedule(const std::string& id);
  schedule::TickResult tick(std::optional<Timestamp> now);

  // Runs
  /// Admits and starts the run on a background thread. Errors: not_found,
  /// not_ready, run_in_progress.
  exec::Run start_run(const std::string& workflow_id);
  exec::Run get_run(const std::string& run_id) const;
  /// Events with seq > after, waiting up to `timeout` while the run is live.
  std::vector<exec::RunEvent> events(const std::string& run_id, std::optional<std::uint64_t> after,
                                     std::chrono::milliseconds timeout) const;
  /// True once the run's log holds a terminal event.
  bool run_finished(const std::string& run_id) const;
  /// Blocks until every background run has ended.
  void wait_idle();

  // Actions
  std::vector<actions::ActionDescriptor> list_actions() const;
  /// Adds (or replaces, when `replace`) and persists a manifest.
  actions::ActionDescriptor add_action(const nlohmann::json& manifest, bool replace = false);

  /// Reasons the workflow cannot run yet.
  std::vector<std::string> readiness(const model::Workflow& wf) const;

private:
  std::filesystem::path workflow_file(const std::string& id) const;
  void save(model::Workflow wf);
  void save_checked(model::Workflow wf);
  model::Workflow with_status(model::Workflow wf) const;
  std::mutex& lock_for(const std::string& id);
  model::Workflow remap_step(model::Workflow wf, std::size_t index) const;
  model::Workflow reextract_step(model::Workflow wf, std::size_t index) const;

  std::filesystem::path data_dir_;
  Clock clock_;
  std::shared_ptr<IdGenerator> ids_;
  std::shared_ptr<agents::Gateway> gateway_;
  std::shared_ptr<actions::ActionPool> pool_;
  std::unique_ptr<exec::Executor> executor_;
  std::unique_ptr<suggest::SuggestionPipeline> suggestions_;
  std::unique_ptr<schedule::Scheduler> scheduler_;

  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;

  std::mutex threads_mutex_;
  std::vector<std::thread> threads_;
};

}  // namespace intentflow::service
