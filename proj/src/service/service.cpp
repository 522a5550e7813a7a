#include "intentflow/service/service.hpp"

#include "intentflow/actions/mapping.hpp"
#include "intentflow/agents/external.hpp"
#include "intentflow/error.hpp"
#include "intentflow/exec/value.hpp"
#include "intentflow/extraction/extractor.hpp"
#include "intentflow/model/serialize.hpp"
#include "intentflow/model/validate.hpp"
#include "intentflow/planning/planner.hpp"
#include "intentflow/service/default_actions.hpp"
#include "intentflow/text/lexicon.hpp"

#include <algorithm>
#include <iostream>

namespace intentflow::service {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

bool safe_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }) && id.find("..") == std::string::npos;
}

std::size_t index_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw Error(ErrorCode::bad_request, std::string("\"") + key + "\" must be a non-negative integer");
  }
  return j[key].get<std::size_t>();
}

std::string text_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string() || text::trim(j[key].get<std::string>()).empty()) {
    throw Error(ErrorCode::bad_request, std::string("\"") + key + "\" must be a non-empty string");
  }
  return text::trim(j[key].get<std::string>());
}

/// Rewrites every upstream reference with `remap(old) -> new index`; a
/// nullopt result unlinks the capsule.
void remap_upstream(model::Workflow& wf, const std::function<std::optional<std::size_t>(std::size_t)>& remap) {
  for (auto& step : wf.steps) {
    for (auto& cap : step.data) {
      if (!cap.source || cap.source->kind != model::SourceKind::upstream || !cap.source->step_index) continue;
      if (auto to = remap(*cap.source->step_index)) {
        cap.source->step_index = *to;
      } else {
        cap.source.reset();
        cap.state = model::CapsuleState::unresolved;
      }
    }
    if (!step.action) continue;
    for (auto it = step.action->parameters.begin(); it != step.action->parameters.end();) {
      auto* src = std::get_if<model::DataSource>(&it->second);
      if (src && src->kind == model::SourceKind::upstream && src->step_index) {
        if (auto to = remap(*src->step_index)) {
          src->step_index = *to;
        } else {
          it = step.action->parameters.erase(it);
          continue;
        }
      }
      ++it;
    }
  }
}

void reindex(model::Workflow& wf) {
  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    wf.steps[i].index = i;
    wf.steps[i].output.reset();
  }
}

}  // namespace

StepPatch StepPatch::from_json(const json& j) {
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
    throw Error(ErrorCode::bad_request, "patch must be an object with an \"op\"");
  }
  const std::string op = j["op"].get<std::string>();
  StepPatch p;
  if (op == "add") {
    p.op = Op::add;
    p.text = text_field(j, "text");
    if (j.contains("position")) p.to = index_field(j, "position");
  } else if (op == "remove") {
    p.op = Op::remove;
    p.index = index_field(j, "index");
  } else if (op == "reorder") {
    p.op = Op::reorder;
    p.index = index_field(j, "from");
    p.to = index_field(j, "to");
  } else if (op == "edit") {
    p.op = Op::edit;
    p.index = index_field(j, "index");
    p.text = text_field(j, "text");
  } else if (op == "bind") {
    p.op = Op::bind;
    p.index = index_field(j, "index");
    p.action_id = text_field(j, "action_id");
    if (j.contains("parameters")) {
      if (!j["parameters"].is_object()) throw Error(ErrorCode::bad_request, "\"parameters\" must be an object");
      p.parameters = j["parameters"];
    }
  } else {
    throw Error(ErrorCode::bad_request, "unknown op \"" + op + "\"; expected add, remove, reorder, edit or bind");
  }
  return p;
}

// ---------------------------------------------------------------------------

Service::Service(ServiceOptions options) : data_dir_(std::move(options.data_dir)), clock_(std::move(options.clock)) {
  for (const char* sub : {"workflows", "runs", "actions", "suggestions", "outbox"}) {
    fs::create_directories(data_dir_ / sub);
  }
  ids_ = options.id_seed ? std::make_shared<IdGenerator>(*options.id_seed) : std::make_shared<IdGenerator>();
  gateway_ = options.gateway ? options.gateway : agents::make_gateway(options.offline);
  pool_ = std::make_shared<actions::ActionPool>();

  auto manifests = actions::load_manifest_dir(data_dir_ / "actions");
  if (manifests.empty()) {
    manifests = default_actions();
    for (const auto& a : manifests) {
      exec::write_file_atomic(data_dir_ / "actions" / (a.id + ".json"), model::canonical_text(actions::to_manifest(a)));
    }
  }
  for (auto& a : manifests) pool_->upsert(std::move(a));

  executor_ = std::make_unique<exec::Executor>(data_dir_, pool_, clock_, ids_,
                                               options.http ? *options.http : exec::default_http_hooks());
  suggestions_ = std::make_unique<suggest::SuggestionPipeline>(*gateway_, pool_, data_dir_ / "suggestions", clock_, ids_);

  schedule::SchedulerHooks hooks;
  hooks.update = [this](const std::string& id, const std::function<void(model::Workflow&)>& change) {
    std::lock_guard lock(lock_for(id));
    model::Workflow wf = get_workflow(id);
    change(wf);
    save(wf);
  };
  hooks.list = [this] { return list_workflows(); };
  hooks.readiness_problems = [this](const model::Workflow& wf) { return readiness(wf); };
  hooks.is_running = [this](const std::string& id) { return executor_->is_running(id); };
  hooks.start_run = [this](const model::Workflow& wf) { return start_run(wf.id).id; };
  scheduler_ = std::make_unique<schedule::Scheduler>(std::move(hooks), data_dir_ / "scheduler.json", clock_);
}

Service::~Service() { wait_idle(); }

void Service::wait_idle() {
  for (;;) {
    std::vector<std::thread> threads;
    {
      std::lock_guard lock(threads_mutex_);
      threads.swap(threads_);
    }
    if (threads.empty()) return;
    for (auto& t : threads) t.join();
  }
}

std::mutex& Service::lock_for(const std::string& id) {
  std::lock_guard lock(locks_mutex_);
  auto& m = locks_[id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

fs::path Service::workflow_file(const std::string& id) const { return data_dir_ / "workflows" / (id + ".json"); }

std::vector<std::string> Service::readiness(const model::Workflow& wf) const {
  return exec::readiness_problems(wf, *pool_->snapshot());
}

model::Workflow Service::with_status(model::Workflow wf) const {
  if (wf.status == model::WorkflowStatus::running) return wf;
  wf.status = readiness(wf).empty() ? model::WorkflowStatus::ready : model::WorkflowStatus::draft;
  return wf;
}

void Service::save(model::Workflow wf) { exec::write_file_atomic(workflow_file(wf.id), model::serialize(wf)); }

void Service::save_checked(model::Workflow wf) {
  const auto report = model::validate(wf);
  if (!report.ok()) {
    throw Error(ErrorCode::validation_failed, "workflow " + wf.id + " fails validation: " + report.violations.front().rule,
                report.to_json());
  }
  save(std::move(wf));
}

// ---------------------------------------------------------------------------

suggest::Suggestion Service::suggest(const std::string& prompt) { return suggestions_->suggest(prompt); }

suggest::Suggestion Service::get_suggestion(const std::string& id) { return suggestions_->get(id); }

model::Workflow Service::apply(const std::string& suggestion_id) {
  model::Workflow out;
  suggestions_->apply(suggestion_id, [&](const model::Workflow& wf) {
    out = with_status(wf);
    save_checked(out);
  });
  return out;
}

std::optional<suggest::Suggestion> Service::reject(const std::string& suggestion_id,
                                                   const std::optional<std::string>& prompt) {
  return suggestions_->reject(suggestion_id, prompt);
}

// ---------------------------------------------------------------------------

std::vector<model::Workflow> Service::list_workflows() const {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(data_dir_ / "workflows", ec)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<model::Workflow> out;
  for (const auto& f : files) {
    try {
      out.push_back(model::deserialize(exec::read_file(f)).workflow);
    } catch (const std::exception& e) {
      std::clog << "skipping unreadable workflow " << f.filename().string() << ": " << e.what() << "\n";
    }
  }
  return out;
}

model::Workflow Service::get_workflow(const std::string& id) const {
  std::error_code ec;
  if (!safe_id(id) || !fs::exists(workflow_file(id), ec)) {
    throw Error(ErrorCode::not_found, "unknown workflow " + id, {{"workflow_id", id}});
  }
  return model::deserialize(exec::read_file(workflow_file(id))).workflow;
}

model::Workflow Service::create_workflow(model::Workflow wf) {
  if (wf.id.empty()) wf.id = ids_->next("wf");
  if (!safe_id(wf.id)) throw Error(ErrorCode::bad_request, "invalid workflow id \"" + wf.id + "\"");
  std::lock_guard lock(lock_for(wf.id));
  std::error_code ec;
  if (fs::exists(workflow_file(wf.id), ec)) throw Error(ErrorCode::conflict, "workflow " + wf.id + " already exists");
  const auto now = clock_();
  if (wf.created_at == Timestamp{}) wf.created_at = now;
  if (wf.updated_at == Timestamp{}) wf.updated_at = now;
  wf = with_status(std::move(wf));
  save_checked(wf);
  return wf;
}

model::Workflow Service::import_workflow(const std::string& id, std::string_view bytes) {
  if (!safe_id(id)) throw Error(ErrorCode::bad_request, "invalid workflow id \"" + id + "\"");
  model::Workflow wf = model::deserialize(bytes).workflow;
  wf.id = id;
  std::lock_guard lock(lock_for(id));
  save_checked(wf);
  return wf;
}

std::string Service::export_workflow(const std::string& id) const { return model::serialize(get_workflow(id)); }

void Service::delete_workflow(const std::string& id) {
  std::lock_guard lock(lock_for(id));
  get_workflow(id);
  if (executor_->is_running(id)) throw Error(ErrorCode::run_in_progress, "workflow " + id + " is running");
  fs::remove(workflow_file(id));
}

// ---------------------------------------------------------------------------

model::Workflow Service::reextract_step(model::Workflow wf, std::size_t index) const {
  extraction::EntityExtractor extractor(*gateway_);
  const auto entities = extractor.extract(wf.plan_texts());
  model::Workflow scratch = wf;
  for (std::size_t i = 0; i < scratch.steps.size(); ++i) {
    if (i != index) scratch.steps[i].data.clear();
  }
  scratch = extraction::materialize(entities, std::move(scratch));
  wf.steps[index].data = scratch.steps[index].data;
  wf.steps[index].verb = scratch.steps[index].verb;
  wf.steps[index].context = scratch.steps[index].context;
  return wf;
}

model::Workflow Service::remap_step(model::Workflow wf, std::size_t index) const {
  const auto pool = pool_->snapshot();
  auto& step = wf.steps[index];
  if (pool->empty()) return wf;
  actions::CandidateSet candidates;
  try {
    candidates = actions::retrieve(step.text, *pool, actions::kDefaultTopK, index);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::empty_text) throw;
    step.action.reset();
    return wf;
  }
  step.action = actions::Mapper(*gateway_).map(step, candidates, *pool).binding;
  return wf;
}

model::Workflow Service::patch_steps(const std::string& id, const StepPatch& patch) {
  std::lock_guard lock(lock_for(id));
  model::Workflow wf = get_workflow(id);
  if (wf.status == model::WorkflowStatus::running) {
    throw Error(ErrorCode::run_in_progress, "workflow " + id + " is running");
  }
  const std::size_t n = wf.steps.size();
  auto check = [&](std::size_t i, std::size_t limit, const char* what) {
    if (i >= limit) {
      throw Error(ErrorCode::bad_request, std::string(what) + " " + std::to_string(i) + " out of range (workflow has " +
                                              std::to_string(n) + " steps)");
    }
  };

  switch (patch.op) {
    case StepPatch::Op::add: {
      const std::size_t pos = patch.to.value_or(n);
      check(pos, n + 1, "position");
      model::Step step;
      step.text = patch.text;
      wf.steps.insert(wf.steps.begin() + static_cast<std::ptrdiff_t>(pos), std::move(step));
      remap_upstream(wf, [&](std::size_t old) -> std::optional<std::size_t> { return old >= pos ? old + 1 : old; });
      reindex(wf);
      wf = remap_step(reextract_step(std::move(wf), pos), pos);
      break;
    }
    case StepPatch::Op::remove: {
      check(patch.index, n, "step");
      const std::size_t gone = patch.index;
      wf.steps.erase(wf.steps.begin() + static_cast<std::ptrdiff_t>(gone));
      // Consumers of the removed step read from the step before it instead.
      remap_upstream(wf, [&](std::size_t old) -> std::optional<std::size_t> {
        if (old < gone) return old;
        if (old > gone) return old - 1;
        if (gone == 0) return std::nullopt;
        return gone - 1;
      });
      reindex(wf);
      break;
    }
    case StepPatch::Op::reorder: {
      check(patch.index, n, "from");
      check(*patch.to, n, "to");
      const std::size_t from = patch.index;
      const std::size_t to = *patch.to;
      std::vector<std::size_t> order(n);  // order[new] = old
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      const std::size_t moved = order[from];
      order.erase(order.begin() + static_cast<std::ptrdiff_t>(from));
      order.insert(order.begin() + static_cast<std::ptrdiff_t>(to), moved);
      std::vector<std::size_t> where(n);  // where[old] = new
      std::vector<model::Step> steps;
      for (std::size_t i = 0; i < n; ++i) {
        where[order[i]] = i;
        steps.push_back(wf.steps[order[i]]);
      }
      wf.steps = std::move(steps);
      remap_upstream(wf, [&](std::size_t old) -> std::optional<std::size_t> { return where[old]; });
      reindex(wf);
      break;
    }
    case StepPatch::Op::edit: {
      check(patch.index, n, "step");
      wf.steps[patch.index].text = patch.text;
      wf.steps[patch.index].output.reset();
      wf = remap_step(reextract_step(std::move(wf), patch.index), patch.index);
      break;
    }
    case StepPatch::Op::bind: {
      check(patch.index, n, "step");
      const auto action = pool_->find(patch.action_id);
      if (!action) throw Error(ErrorCode::not_found, "unknown action " + patch.action_id, {{"action_id", patch.action_id}});
      auto& step = wf.steps[patch.index];
      model::ActionBinding b;
      b.action_id = action->id;
      b.verb = step.verb;
      double similarity = 0.0;
      try {
        similarity = actions::dot(actions::embed_text(step.text), action->embedding);
      } catch (const Error&) {
      }
      b.score = actions::mapping_score(similarity, *action, step);
      if (patch.parameters.is_object()) {
        model::DecodeContext ctx;
        for (const auto& [label, value] : patch.parameters.items()) {
          try {
            b.parameters.emplace(label, value.is_string() ? model::ParameterValue(value.get<std::string>())
                                                          : model::parameter_from_json(value, "$.parameters." + label, ctx));
          } catch (const Error& e) {
            throw Error(ErrorCode::bad_request, e.what(), e.details());
          }
        }
      } else {
        b.parameters = actions::bind_parameters(*action, step).parameters;
      }
      step.action = std::move(b);
      break;
    }
  }

  wf.updated_at = clock_();
  wf = with_status(std::move(wf));
  save_checked(wf);
  return wf;
}

model::Workflow Service::attach_data(const std::string& id, std::size_t step_index, const std::string& label,
                                     const model::DataSource& source) {
  std::lock_guard lock(lock_for(id));
  model::Workflow wf = get_workflow(id);
  if (wf.status == model::WorkflowStatus::running) {
    throw Error(ErrorCode::run_in_progress, "workflow " + id + " is running");
  }
  if (step_index >= wf.steps.size()) {
    throw Error(ErrorCode::not_found, "workflow " + id + " has no step " + std::to_string(step_index));
  }
  if (source.kind == model::SourceKind::upstream) {
    if (!source.step_index) throw Error(ErrorCode::bad_request, "upstream source needs a step_index");
  } else if (text::trim(source.ref).empty()) {
    throw Error(ErrorCode::bad_request, "source ref must not be empty");
  }
  auto& step = wf.steps[step_index];
  auto it = std::find_if(step.data.begin(), step.data.end(), [&](const auto& c) { return c.label == label; });
  if (it == step.data.end()) {
    const std::string wanted = text::to_lower(label);
    it = std::find_if(step.data.begin(), step.data.end(),
                      [&](const auto& c) { return text::to_lower(c.label) == wanted; });
  }
  if (it == step.data.end()) {
    throw Error(ErrorCode::not_found, "step " + std::to_string(step_index) + " has no data capsule \"" + label + "\"",
                {{"labels", [&] {
                    json l = json::array();
                    for (const auto& c : step.data) l.push_back(c.label);
                    return l;
                  }()}});
  }
  it->state = model::CapsuleState::resolved;
  it->source = source;
  step.output.reset();
  wf = remap_step(std::move(wf), step_index);
  wf.updated_at = clock_();
  wf = with_status(std::move(wf));
  save_checked(wf);
  return wf;
}

model::Workflow Service::refine(const std::string& id, const std::optional<std::string>& feedback, bool approve) {
  std::lock_guard lock(lock_for(id));
  model::Workflow wf = get_workflow(id);
  if (wf.status == model::WorkflowStatus::running) {
    throw Error(ErrorCode::run_in_progress, "workflow " + id + " is running");
  }
  if (!approve && !feedback) throw Error(ErrorCode::bad_request, "give feedback text or approve");

  planning::Plan plan;
  plan.steps = wf.plan_texts();
  plan.final = wf.approved();
  if (!wf.refinement_history.empty()) {
    const auto& last = wf.refinement_history.back();
    plan.iteration = last.approved ? last.iteration : last.iteration + 1;
  }
  planning::Planner planner(*gateway_);
  const auto result = planner.refine(plan, approve ? planning::Feedback::approve() : planning::Feedback::modify(*feedback));
  wf.refinement_history.push_back(result.record);
  if (!approve) {
    const auto entities = extraction::EntityExtractor(*gateway_).extract(result.plan.steps);
    const std::string wf_id = wf.id;
    const std::string title = wf.title;
    wf = suggest::compose_workflow(*gateway_, *pool_->snapshot(), wf_id, title, result.plan.steps, entities, std::move(wf));
  }
  wf.updated_at = clock_();
  wf = with_status(std::move(wf));
  save_checked(wf);
  return wf;
}

// ---------------------------------------------------------------------------

model::Schedule Service::schedule(const std::string& id, const std::string& expression, const std::string& timezone) {
  return scheduler_->schedule(id, expression, timezone);
}

void Service::unschedule(const std::string& id) {
  scheduler_->unschedule(id);
}

schedule::TickResult Service::tick(std::optional<Timestamp> now) { return scheduler_->tick(now.value_or(clock_())); }

// ---------------------------------------------------------------------------

exec::Run Service::start_run(const std::string& workflow_id) {
  std::shared_ptr<exec::RunHandle> handle;
  model::Workflow wf;
  {
    std::lock_guard lock(lock_for(workflow_id));
    wf = get_workflow(workflow_id);
    handle = executor_->admit(wf);
    model::Workflow marked = wf;
    marked.status = model::WorkflowStatus::running;
    save(marked);
  }
  std::lock_guard lock(threads_mutex_);
  threads_.emplace_back([this, handle, wf] {
    const exec::Run run = executor_->execute(handle, wf);
    std::lock_guard wf_lock(lock_for(wf.id));
    try {
      model::Workflow done = get_workflow(wf.id);
      done.status = run.status == exec::RunStatus::succeeded ? model::WorkflowStatus::succeeded
                                                            : model::WorkflowStatus::failed;
      for (auto& s : done.steps) s.output.reset();
      for (const auto& out : run.step_results) {
        if (out.step_index < done.steps.size()) done.steps[out.step_index].output = out;
      }
      save(done);
    } catch (const std::exception& e) {
      std::clog << "run " << run.id << ": could not record the outcome on workflow " << wf.id << ": " << e.what() << "\n";
    }
  });
  return handle->run;
}

exec::Run Service::get_run(const std::string& run_id) const {
  if (!safe_id(run_id)) throw Error(ErrorCode::not_found, "unknown run " + run_id);
  return executor_->load_run(run_id);
}

std::vector<exec::RunEvent> Service::events(const std::string& run_id, std::optional<std::uint64_t> after,
                                            std::chrono::milliseconds timeout) const {
  if (!safe_id(run_id)) throw Error(ErrorCode::not_found, "unknown run " + run_id);
  if (auto log = executor_->live_log(run_id)) return log->wait_after(after, timeout);
  return exec::events_after(exec::read_event_file(executor_->events_file(run_id)), after);
}

bool Service::run_finished(const std::string& run_id) const {
  if (auto log = executor_->live_log(run_id)) return log->finished();
  const auto all = exec::read_event_file(executor_->events_file(run_id));
  return !all.empty() && exec::is_terminal(all.back().kind);
}

// ---------------------------------------------------------------------------

std::vector<actions::ActionDescriptor> Service::list_actions() const { return *pool_->snapshot(); }

actions::ActionDescriptor Service::add_action(const json& manifest, bool replace) {
  actions::ActionDescriptor a = actions::from_manifest(manifest);
  if (!safe_id(a.id)) throw Error(ErrorCode::validation_failed, "action id \"" + a.id + "\" is not a valid file name",
                                  {{"path", "$.id"}});
  if (replace) {
    pool_->upsert(a);
  } else {
    pool_->add(a);
  }
  exec::write_file_atomic(data_dir_ / "actions" / (a.id + ".json"), model::canonical_text(actions::to_manifest(a)));
  return *pool_->find(a.id);
}

}  // namespace intentflow::service
