#include "intentflow/exec/executor.hpp"

#include "intentflow/actions/mapping.hpp"
#include "intentflow/error.hpp"
#include "intentflow/model/serialize.hpp"
#include "intentflow/model/validate.hpp"

#include <cstdio>

namespace intentflow::exec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::succeeded: return "succeeded";
    case RunStatus::failed: return "failed";
  }
  return "failed";
}

std::optional<RunStatus> parse_run_status(std::string_view s) {
  for (auto k : {RunStatus::running, RunStatus::succeeded, RunStatus::failed}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

json to_json(const Run& r) {
  json results = json::array();
  for (const auto& o : r.step_results) results.push_back(model::to_json(o));
  return json{{"id", r.id},
              {"workflow_id", r.workflow_id},
              {"status", std::string(to_string(r.status))},
              {"started_at", format_utc(r.started_at)},
              {"ended_at", r.ended_at ? json(format_utc(*r.ended_at)) : json(nullptr)},
              {"step_results", std::move(results)}};
}

Run run_from_json(const json& j) {
  Run r;
  try {
    r.id = j.at("id").get<std::string>();
    r.workflow_id = j.at("workflow_id").get<std::string>();
    auto st = parse_run_status(j.at("status").get<std::string>());
    if (!st) throw Error(ErrorCode::parse_error, "unknown run status");
    r.status = *st;
    r.started_at = parse_utc(j.at("started_at").get<std::string>());
    if (j.contains("ended_at") && !j["ended_at"].is_null()) r.ended_at = parse_utc(j["ended_at"].get<std::string>());
    model::DecodeContext ctx;
    const auto& results = j.at("step_results");
    for (std::size_t i = 0; i < results.size(); ++i) {
      r.step_results.push_back(model::step_output_from_json(results[i], "$.step_results[" + std::to_string(i) + "]", ctx));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed run document: ") + e.what());
  }
  return r;
}

std::vector<std::string> readiness_problems(const model::Workflow& wf,
                                            const std::vector<actions::ActionDescriptor>& pool) {
  std::vector<std::string> out;
  for (const auto& v : model::validate(wf).violations) {
    if (v.rule == model::rules::kUnresolvedInReady) continue;
    out.push_back(v.rule + ": " + v.message);
  }
  if (wf.steps.empty()) out.push_back("workflow has no steps");
  for (const auto& step : wf.steps) {
    const std::string where = "step " + std::to_string(step.index) + ": ";
    for (const auto& c : step.data) {
      if (!c.resolved()) out.push_back(where + "data \"" + c.label + "\" is not linked");
    }
    if (!step.action) {
      out.push_back(where + "no action bound");
      continue;
    }
    const auto* action = actions::find_in(pool, step.action->action_id);
    if (!action) {
      out.push_back(where + "action " + step.action->action_id + " is not in the action pool");
      continue;
    }
    if (step.index > 0) continue;  // later steps chain from the previous output
    const auto computed = actions::bind_parameters(*action, step);
    for (const auto* p : action->required_parameters()) {
      if (!step.action->parameters.count(p->label) && !computed.parameters.count(p->label)) {
        out.push_back(where + "parameter \"" + p->label + "\" has no input");
      }
    }
  }
  return out;
}

Executor::Executor(fs::path data_dir, std::shared_ptr<actions::ActionPool> pool, Clock clock,
                   std::shared_ptr<IdGenerator> ids, HttpHooks http)
    : data_dir_(std::move(data_dir)),
      pool_(std::move(pool)),
      clock_(std::move(clock)),
      ids_(std::move(ids)),
      http_(std::move(http)) {}

fs::path Executor::events_file(const std::string& run_id) const { return data_dir_ / "runs" / run_id / "events.jsonl"; }

fs::path Executor::outbox_dir() const { return data_dir_ / "outbox"; }

std::shared_ptr<RunHandle> Executor::admit(const model::Workflow& wf) {
  const auto problems = readiness_problems(wf, *pool_->snapshot());
  if (!problems.empty()) {
    throw Error(ErrorCode::not_ready, "workflow " + wf.id + " is not ready to run", json{{"problems", problems}});
  }
  auto handle = std::make_shared<RunHandle>();
  {
    std::lock_guard lock(mutex_);
    if (active_.count(wf.id)) throw Error(ErrorCode::run_in_progress, "workflow " + wf.id + " is already running");
    active_.insert(wf.id);
  }
  try {
    handle->run.id = ids_->next("run");
    handle->run.workflow_id = wf.id;
    handle->run.status = RunStatus::running;
    handle->run.started_at = clock_();
    handle->log = std::make_shared<EventLog>(handle->run.id, events_file(handle->run.id), clock_);
    persist(handle->run);
    std::lock_guard lock(mutex_);
    logs_[handle->run.id] = handle->log;
  } catch (...) {
    std::lock_guard lock(mutex_);
    active_.erase(wf.id);
    throw;
  }
  return handle;
}

Run Executor::execute(const std::shared_ptr<RunHandle>& handle, const model::Workflow& wf) {
  Run run = handle->run;
  EventLog& log = *handle->log;
  try {
    log.append(EventKind::run_started, std::nullopt, wf.id);
    std::vector<std::optional<Value>> outputs(wf.steps.size());
    std::string failure;
    for (std::size_t i = 0; i < wf.steps.size(); ++i) {
      const RunEvent started = log.append(EventKind::step_started, i, wf.steps[i].text);
      try {
        Value v = execute_step(wf, i, outputs, run, started.seq);
        const model::StepOutput out = store_output(run, i, v);
        run.step_results.push_back(out);
        outputs[i] = std::move(v);
        log.append(EventKind::step_completed, i, out.value_ref);
      } catch (const std::exception& e) {
        failure = "step " + std::to_string(i) + " failed: " + e.what();
        log.append(EventKind::step_failed, i, e.what());
        break;
      }
    }
    run.status = failure.empty() ? RunStatus::succeeded : RunStatus::failed;
    run.ended_at = clock_();
    persist(run);
    if (failure.empty()) {
      log.append(EventKind::run_completed, std::nullopt, "succeeded");
    } else {
      log.append(EventKind::run_failed, std::nullopt, failure);
    }
  } catch (const std::exception& e) {
    run.status = RunStatus::failed;
    run.ended_at = clock_();
    try {
      persist(run);
      if (!log.finished()) log.append(EventKind::run_failed, std::nullopt, e.what());
    } catch (...) {
    }
  }
  std::lock_guard lock(mutex_);
  active_.erase(wf.id);
  return run;
}

Run Executor::run(const model::Workflow& wf) { return execute(admit(wf), wf); }

std::shared_ptr<EventLog> Executor::live_log(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  auto it = logs_.find(run_id);
  return it == logs_.end() ? nullptr : it->second;
}

bool Executor::is_running(const std::string& workflow_id) const {
  std::lock_guard lock(mutex_);
  return active_.count(workflow_id) > 0;
}

Run Executor::load_run(const std::string& run_id) const {
  const fs::path file = data_dir_ / "runs" / run_id / "run.json";
  if (run_id.empty() || run_id.find('/') != std::string::npos || !fs::exists(file)) {
    throw Error(ErrorCode::not_found, "unknown run " + run_id);
  }
  json j = json::parse(read_file(file), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::parse_error, "run document " + run_id + " is not valid JSON");
  return run_from_json(j);
}

void Executor::persist(const Run& r) const {
  write_file_atomic(data_dir_ / "runs" / r.id / "run.json", model::canonical_text(to_json(r)));
}

Value Executor::load_output(const model::StepOutput& out) const { return decode(out.kind, data_dir_ / out.value_ref); }

namespace {

Value source_value(const model::DataSource& src, std::size_t i, const std::vector<std::optional<Value>>& outputs,
                   const fs::path& data_dir) {
  switch (src.kind) {
    case model::SourceKind::upstream: {
      if (!src.step_index || *src.step_index >= i) {
        throw Error(ErrorCode::executor_failure, "step " + std::to_string(i) + " reads a later step's output");
      }
      const auto& v = outputs[*src.step_index];
      if (!v) throw Error(ErrorCode::executor_failure, "output of step " + std::to_string(*src.step_index) + " is missing");
      return *v;
    }
    case model::SourceKind::url: return Value::of_url(src.ref);
    case model::SourceKind::file:
    case model::SourceKind::database: {
      fs::path p = src.ref;
      if (p.is_relative()) p = data_dir / p;
      if (!fs::exists(p)) throw Error(ErrorCode::executor_failure, "input file " + src.ref + " does not exist");
      return Value::of_file(p);
    }
  }
  throw Error(ErrorCode::executor_failure, "unknown data source");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Value Executor::execute_step(const model::Workflow& wf, std::size_t i,
                             const std::vector<std::optional<Value>>& outputs, const Run& run,
                             std::uint64_t event_seq) const {
  const model::Step& step = wf.steps[i];
  if (!step.action) throw Error(ErrorCode::executor_failure, "no action bound");
  const auto snapshot = pool_->snapshot();
  const actions::ActionDescriptor* action = actions::find_in(*snapshot, step.action->action_id);
  if (!action) throw Error(ErrorCode::executor_failure, "action " + step.action->action_id + " is not registered");

  auto params = step.action->parameters;
  for (auto& [label, value] : actions::bind_parameters(*action, step).parameters) params.emplace(label, value);

  std::vector<Arg> args;
  for (const auto& spec : action->parameter_schema) {
    Arg a{spec, std::nullopt};
    if (auto it = params.find(spec.label); it != params.end()) {
      if (const auto* src = std::get_if<model::DataSource>(&it->second)) {
        a.value = source_value(*src, i, outputs, data_dir_);
      } else {
        a.value = Value::of_text(std::get<std::string>(it->second));
      }
    } else if (spec.required) {
      if (i == 0 || !outputs[i - 1]) {
        throw Error(ErrorCode::executor_failure, "parameter \"" + spec.label + "\" has no input");
      }
      a.value = *outputs[i - 1];
    }
    args.push_back(std::move(a));
  }

  BuiltinContext ctx;
  ctx.run_id = run.id;
  ctx.step_index = i;
  ctx.event_seq = event_seq;
  ctx.work_dir = data_dir_ / "runs" / run.id / "steps" / std::to_string(i) / "work";
  ctx.data_dir = data_dir_;
  ctx.outbox = outbox_dir();
  ctx.config = action->executor_config;
  ctx.http = http_;
  fs::create_directories(ctx.work_dir);

  switch (action->executor_kind) {
    case actions::ExecutorKind::builtin: {
      const std::string name = action->executor_config.value("builtin", action->name);
      auto it = builtins().find(name);
      if (it == builtins().end()) throw Error(ErrorCode::executor_failure, "unknown builtin " + name);
      return it->second(args, ctx);
    }
    case actions::ExecutorKind::http_api: {
      const std::string endpoint = action->executor_config.value("endpoint", std::string{});
      if (endpoint.empty()) throw Error(ErrorCode::executor_failure, "http_api action without endpoint");
      if (!http_.post_json) throw Error(ErrorCode::executor_failure, "no HTTP client configured");
      json body{{"action", action->id}, {"parameters", json::object()}};
      for (const auto& a : args) {
        if (!a.value) continue;
        body["parameters"][a.spec.label] = a.value->kind == model::OutputKind::file ? a.value->file.string() : as_text(*a.value);
      }
      return Value::of_text(http_.post_json(endpoint, body.dump()));
    }
    case actions::ExecutorKind::shell_out: {
      const std::string command = action->executor_config.value("command", std::string{});
      if (command.empty()) throw Error(ErrorCode::executor_failure, "shell-out action without command");
      return Value::of_text(run_command(command, args, ctx.work_dir));
    }
  }
  throw Error(ErrorCode::executor_failure, "unknown executor kind");
}

model::StepOutput Executor::store_output(const Run& run, std::size_t i, const Value& v) const {
  const Stored s = encode(v);
  const fs::path rel = fs::path("runs") / run.id / "steps" / std::to_string(i) / (hex64(actions::fnv1a64(s.bytes)) + s.extension);
  const fs::path abs = data_dir_ / rel;
  if (!fs::exists(abs)) write_file_atomic(abs, s.bytes);
  model::StepOutput out;
  out.step_index = i;
  out.kind = v.kind;
  out.value_ref = rel.generic_string();
  out.produced_at = clock_();
  return out;
}

}  // namespace intentflow::exec
