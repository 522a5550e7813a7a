#include "intentflow/suggest/pipeline.hpp"

#include "intentflow/actions/mapping.hpp"
#include "intentflow/error.hpp"
#include "intentflow/exec/value.hpp"
#include "intentflow/model/serialize.hpp"
#include "intentflow/text/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace intentflow::suggest {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    json details = e.details().is_object() ? e.details() : json::object();
    if (!e.details().is_null() && !e.details().is_object()) details["cause"] = e.details();
    details["stage"] = stage;
    throw Error(e.code(), std::string(stage) + ": " + e.what(), details);
  }
}

json context_json(const std::vector<model::ContextAnnotation>& context) {
  json out = json::array();
  for (const auto& c : context) out.push_back({{"kind", model::to_string(c.kind)}, {"text", c.text}});
  return out;
}

std::vector<model::ContextAnnotation> context_from_json(const json& j) {
  std::vector<model::ContextAnnotation> out;
  for (const auto& c : j) {
    auto kind = model::parse_context_kind(c.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::parse_error, "unknown context kind");
    out.push_back({c.at("text").get<std::string>(), *kind});
  }
  return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Case-insensitive whole-phrase search.
std::size_t find_phrase(const std::string& text, const std::string& phrase, std::size_t from = 0) {
  const std::string lt = text::to_lower(text);
  const std::string lp = text::to_lower(phrase);
  if (lp.empty()) return std::string::npos;
  for (auto at = lt.find(lp, from); at != std::string::npos; at = lt.find(lp, at + 1)) {
    const bool left = at == 0 || !word_char(lt[at - 1]);
    const bool right = at + lp.size() == lt.size() || !word_char(lt[at + lp.size()]);
    if (left && right) return at;
  }
  return std::string::npos;
}

std::string display_line(const std::string& text, const std::string& verb, const std::vector<RenderedLabel>& labels) {
  std::string out = text;
  // Labels first, left to right, so the verb bolding cannot split a label.
  std::size_t cursor = 0;
  for (const auto& l : labels) {
    const auto at = find_phrase(out, l.label, cursor);
    const bool open = l.state == model::CapsuleState::unresolved;
    if (at == std::string::npos) {
      out += open ? " [" + l.label + "]" : " {" + l.label + "}";
      cursor = out.size();
      continue;
    }
    const std::string piece = (open ? "[" : "{") + out.substr(at, l.label.size()) + (open ? "]" : "}");
    out.replace(at, l.label.size(), piece);
    cursor = at + piece.size();
  }
  if (!verb.empty() && find_phrase(out, verb) == 0) {
    out = "**" + out.substr(0, verb.size()) + "**" + out.substr(verb.size());
  }
  return out;
}

}  // namespace

json to_json(const Suggestion& s) {
  json rendered = json::array();
  for (const auto& r : s.rendered_steps) {
    json labels = json::array();
    for (const auto& l : r.data_labels_with_state) {
      labels.push_back({{"label", l.label}, {"state", model::to_string(l.state)}});
    }
    rendered.push_back({{"text", r.text},
                        {"data_labels_with_state", labels},
                        {"action_verb", r.action_verb},
                        {"context", context_json(r.context)},
                        {"display", r.display}});
  }
  return {{"id", s.id},
          {"source_prompt", s.source_prompt},
          {"refined", query::to_json(s.refined)},
          {"plan", {{"steps", s.plan.steps}, {"iteration", s.plan.iteration}, {"final", s.plan.final}}},
          {"entity_set", extraction::to_json(s.entity_set)},
          {"rendered_steps", rendered},
          {"expires_at", format_utc(s.expires_at)}};
}

Suggestion suggestion_from_json(const json& j) {
  try {
    Suggestion s;
    s.id = j.at("id").get<std::string>();
    s.source_prompt = j.at("source_prompt").get<std::string>();
    s.refined = query::refined_query_from_json(j.at("refined"));
    const auto& p = j.at("plan");
    s.plan = {p.at("steps").get<std::vector<std::string>>(), p.at("iteration").get<std::size_t>(),
              p.at("final").get<bool>()};
    s.entity_set = extraction::entity_set_from_json(j.at("entity_set"));
    for (const auto& r : j.at("rendered_steps")) {
      RenderedStep step;
      step.text = r.at("text").get<std::string>();
      for (const auto& l : r.at("data_labels_with_state")) {
        step.data_labels_with_state.push_back(
            {l.at("label").get<std::string>(), l.at("state").get<std::string>() == "resolved"
                                                   ? model::CapsuleState::resolved
                                                   : model::CapsuleState::unresolved});
      }
      step.action_verb = r.at("action_verb").get<std::string>();
      step.context = context_from_json(r.at("context"));
      step.display = r.at("display").get<std::string>();
      s.rendered_steps.push_back(std::move(step));
    }
    s.expires_at = parse_utc(j.at("expires_at").get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed suggestion: ") + e.what());
  }
}

std::vector<RenderedStep> render(const planning::Plan& plan, const extraction::EntitySet& entities) {
  model::Workflow wf;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    model::Step step;
    step.index = i;
    step.text = plan.steps[i];
    wf.steps.push_back(std::move(step));
  }
  wf = extraction::materialize(entities, std::move(wf));
  std::vector<RenderedStep> out;
  for (const auto& step : wf.steps) {
    RenderedStep r;
    r.text = step.text;
    for (const auto& cap : step.data) r.data_labels_with_state.push_back({cap.label, cap.state});
    r.action_verb = step.verb;
    r.context = step.context;
    r.display = display_line(step.text, step.verb, r.data_labels_with_state);
    out.push_back(std::move(r));
  }
  return out;
}

model::Workflow compose_workflow(const agents::Gateway& gateway, const std::vector<actions::ActionDescriptor>& pool,
                                 std::string id, std::string title, const std::vector<std::string>& plan,
                                 const extraction::EntitySet& entities, model::Workflow base) {
  // Sources the user already linked survive a re-plan under the same label.
  std::map<std::string, model::DataCapsule> linked;
  for (const auto& step : base.steps) {
    for (const auto& cap : step.data) {
      if (cap.resolved() && cap.source && cap.source->kind != model::SourceKind::upstream) linked.emplace(cap.label, cap);
    }
  }

  model::Workflow wf = std::move(base);
  wf.id = std::move(id);
  wf.title = std::move(title);
  wf.steps.clear();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    model::Step step;
    step.index = i;
    step.text = plan[i];
    if (i < entities.steps.size()) {
      for (const auto& label : entities.steps[i].data_labels) {
        if (auto it = linked.find(label); it != linked.end()) step.data.push_back(it->second);
      }
    }
    wf.steps.push_back(std::move(step));
  }
  wf = extraction::materialize(entities, std::move(wf));

  if (!pool.empty()) {
    actions::Mapper mapper(gateway);
    for (auto& step : wf.steps) {
      actions::CandidateSet candidates;
      try {
        candidates = actions::retrieve(step.text, pool, actions::kDefaultTopK, step.index);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::empty_text) continue;
        throw;
      }
      step.action = mapper.map(step, candidates, pool).binding;
    }
  }
  wf.status = model::WorkflowStatus::draft;
  return wf;
}

// ---------------------------------------------------------------------------

SuggestionPipeline::SuggestionPipeline(const agents::Gateway& gateway, std::shared_ptr<actions::ActionPool> pool,
                                       fs::path dir, Clock clock, std::shared_ptr<IdGenerator> ids)
    : gateway_(gateway), pool_(std::move(pool)), dir_(std::move(dir)), clock_(std::move(clock)), ids_(std::move(ids)) {
  fs::create_directories(dir_);
}

fs::path SuggestionPipeline::file_of(const std::string& id) const { return dir_ / (id + ".json"); }
fs::path SuggestionPipeline::consumed_of(const std::string& id) const { return dir_ / (id + ".consumed"); }

Suggestion SuggestionPipeline::suggest(const std::string& prompt) {
  if (text::trim(prompt).empty()) throw Error(ErrorCode::bad_request, "prompt must not be empty");

  query::QueryProcessor qp(gateway_);
  planning::Planner planner(gateway_);
  extraction::EntityExtractor extractor(gateway_);

  Suggestion s;
  s.source_prompt = prompt;
  s.refined = in_stage("query-processor", [&] { return qp.process({prompt, std::nullopt}); });
  s.plan = in_stage("planner", [&] { return planner.plan(s.refined); });
  s.entity_set = in_stage("entity-extractor", [&] { return extractor.extract(s.plan.steps); });
  s.rendered_steps = in_stage("entity-extractor", [&] { return render(s.plan, s.entity_set); });
  s.id = ids_->next("sug");
  s.expires_at = clock_() + kSuggestionLifetime;
  exec::write_file_atomic(file_of(s.id), model::canonical_text(to_json(s)));
  return s;
}

Suggestion SuggestionPipeline::get(const std::string& id) const {
  const bool safe = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
  if (!safe) throw Error(ErrorCode::not_found, "unknown suggestion " + id);
  std::error_code ec;
  if (fs::exists(consumed_of(id), ec)) {
    throw Error(ErrorCode::suggestion_consumed, "suggestion " + id + " was already used", {{"suggestion_id", id}});
  }
  if (!fs::exists(file_of(id), ec)) throw Error(ErrorCode::not_found, "unknown suggestion " + id, {{"suggestion_id", id}});
  Suggestion s = suggestion_from_json(json::parse(exec::read_file(file_of(id))));
  if (clock_() >= s.expires_at) {
    throw Error(ErrorCode::not_found, "suggestion " + id + " has expired", {{"suggestion_id", id}, {"expired", true}});
  }
  return s;
}

void SuggestionPipeline::take(const std::string& id) {
  std::lock_guard lock(mutex_);
  std::error_code ec;
  fs::rename(file_of(id), consumed_of(id), ec);
  if (ec) {
    if (fs::exists(consumed_of(id))) {
      throw Error(ErrorCode::suggestion_consumed, "suggestion " + id + " was already used", {{"suggestion_id", id}});
    }
    throw Error(ErrorCode::not_found, "unknown suggestion " + id, {{"suggestion_id", id}});
  }
}

model::Workflow SuggestionPipeline::apply(const std::string& id, const SaveWorkflow& save) {
  const Suggestion s = get(id);
  const auto pool = pool_->snapshot();
  model::Workflow wf = in_stage("action-pool", [&] {
    return compose_workflow(gateway_, *pool, ids_->next("wf"), s.source_prompt, s.plan.steps, s.entity_set);
  });
  wf.created_at = wf.updated_at = clock_();
  take(id);
  save(wf);
  return wf;
}

std::optional<Suggestion> SuggestionPipeline::reject(const std::string& id, const std::optional<std::string>& new_prompt) {
  get(id);
  take(id);
  if (!new_prompt) return std::nullopt;
  return suggest(*new_prompt);
}

std::size_t SuggestionPipeline::purge_expired() {
  std::size_t n = 0;
  const auto now = clock_();
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (entry.path().extension() != ".json") continue;
    try {
      const auto s = suggestion_from_json(json::parse(exec::read_file(entry.path())));
      if (now < s.expires_at) continue;
    } catch (const std::exception&) {
      continue;
    }
    if (fs::remove(entry.path(), ec)) ++n;
  }
  return n;
}

}  // namespace intentflow::suggest
