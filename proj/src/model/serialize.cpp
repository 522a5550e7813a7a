#include "intentflow/model/serialize.hpp"

#include "intentflow/error.hpp"

#include <set>

namespace intentflow::model {

using nlohmann::json;

std::string canonical_text(const json& doc) { return doc.dump(2) + "\n"; }

std::string canonical_line(const json& doc) { return doc.dump(); }

namespace {

json opt(const std::optional<json>& v) { return v ? *v : json(nullptr); }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::parse_error, path + ": " + what, json{{"path", path}});
}

/// Walks one JSON object, remembering which keys were read so the rest can
/// be reported as unknown.
class ObjectReader {
public:
  ObjectReader(const json& j, std::string path, DecodeContext& ctx)
      : j_(j), path_(std::move(path)), ctx_(ctx) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  ~ObjectReader() {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) ctx_.warnings.push_back("unknown field " + at(key) + " ignored");
    }
  }

  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  std::string at(std::string_view key) const { return path_ + "." + std::string(key); }

  const json& required(std::string_view key) {
    seen_.emplace(key);
    auto it = j_.find(std::string(key));
    if (it == j_.end()) fail(at(key), "missing required field");
    return *it;
  }

  /// nullptr when absent or null.
  const json* optional(std::string_view key) {
    seen_.emplace(key);
    auto it = j_.find(std::string(key));
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string string(std::string_view key) {
    const json& v = required(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::size_t index(std::string_view key) {
    const json& v = required(key);
    if (!v.is_number_unsigned()) fail(at(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  bool boolean(std::string_view key) {
    const json& v = required(key);
    if (!v.is_boolean()) fail(at(key), "expected a boolean");
    return v.get<bool>();
  }

  double number(std::string_view key) {
    const json& v = required(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }

  const json& array(std::string_view key) {
    const json& v = required(key);
    if (!v.is_array()) fail(at(key), "expected an array");
    return v;
  }

  Timestamp timestamp(std::string_view key) {
    const std::string s = string(key);
    try {
      return parse_utc(s);
    } catch (const Error&) {
      fail(at(key), "expected a UTC timestamp YYYY-MM-DDTHH:MM:SSZ");
    }
  }

  template <class E, class F>
  E enumeration(std::string_view key, F parse) {
    const std::string s = string(key);
    auto v = parse(s);
    if (!v) fail(at(key), "unknown value '" + s + "'");
    return *v;
  }

  const std::string& path() const { return path_; }

private:
  const json& j_;
  std::string path_;
  DecodeContext& ctx_;
  std::set<std::string, std::less<>> seen_;
};

std::vector<std::string> string_list(const json& arr, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

std::optional<CapsuleState> parse_capsule_state(std::string_view s) {
  if (s == "unresolved") return CapsuleState::unresolved;
  if (s == "resolved") return CapsuleState::resolved;
  return std::nullopt;
}

}  // namespace

ParameterValue parameter_from_json(const json& j, const std::string& path, DecodeContext& ctx) {
  ObjectReader r(j, path, ctx);
  const json* src = r.optional("source");
  const json* text = r.optional("text");
  if ((src == nullptr) == (text == nullptr)) fail(path, "expected exactly one of source or text");
  if (src) return data_source_from_json(*src, r.at("source"), ctx);
  if (!text->is_string()) fail(r.at("text"), "expected a string");
  return text->get<std::string>();
}

json to_json(const DataSource& v) {
  json j;
  j["kind"] = std::string(to_string(v.kind));
  if (v.kind == SourceKind::upstream) {
    j["step_index"] = v.step_index ? json(*v.step_index) : json(nullptr);
  } else {
    j["ref"] = v.ref;
  }
  return j;
}

json to_json(const ParameterValue& v) {
  if (const auto* src = std::get_if<DataSource>(&v)) return json{{"source", to_json(*src)}};
  return json{{"text", std::get<std::string>(v)}};
}

json to_json(const StepOutput& v) {
  return json{{"step_index", v.step_index},
              {"kind", std::string(to_string(v.kind))},
              {"value_ref", v.value_ref},
              {"produced_at", format_utc(v.produced_at)}};
}

json to_json(const Step& v) {
  json data = json::array();
  for (const auto& c : v.data) {
    data.push_back(json{{"label", c.label},
                        {"state", std::string(to_string(c.state))},
                        {"source", c.source ? to_json(*c.source) : json(nullptr)}});
  }
  json context = json::array();
  for (const auto& c : v.context) {
    context.push_back(json{{"text", c.text}, {"kind", std::string(to_string(c.kind))}});
  }
  std::optional<json> action;
  if (v.action) {
    json params = json::object();
    for (const auto& [label, value] : v.action->parameters) params[label] = to_json(value);
    action = json{{"action_id", v.action->action_id},
                  {"verb", v.action->verb},
                  {"score", v.action->score},
                  {"parameters", std::move(params)}};
  }
  return json{{"index", v.index},
              {"text", v.text},
              {"verb", v.verb},
              {"data", std::move(data)},
              {"action", opt(action)},
              {"context", std::move(context)},
              {"output", v.output ? to_json(*v.output) : json(nullptr)}};
}

json to_json(const Workflow& v) {
  json steps = json::array();
  for (const auto& s : v.steps) steps.push_back(to_json(s));
  json history = json::array();
  for (const auto& r : v.refinement_history) {
    history.push_back(json{{"iteration", r.iteration},
                           {"feedback", r.feedback},
                           {"plan_before", r.plan_before},
                           {"plan_after", r.plan_after},
                           {"approved", r.approved}});
  }
  std::optional<json> schedule;
  if (v.schedule) {
    schedule = json{{"expression", v.schedule->expression},
                    {"timezone", v.schedule->timezone},
                    {"next_fire", format_utc(v.schedule->next_fire)}};
  }
  return json{{"version", std::string(kFormatVersion)},
              {"id", v.id},
              {"title", v.title},
              {"steps", std::move(steps)},
              {"status", std::string(to_string(v.status))},
              {"schedule", opt(schedule)},
              {"refinement_history", std::move(history)},
              {"created_at", format_utc(v.created_at)},
              {"updated_at", format_utc(v.updated_at)}};
}

DataSource data_source_from_json(const json& j, const std::string& path, DecodeContext& ctx) {
  ObjectReader r(j, path, ctx);
  DataSource out;
  out.kind = r.enumeration<SourceKind>("kind", parse_source_kind);
  if (out.kind == SourceKind::upstream) {
    out.step_index = r.index("step_index");
  } else {
    out.ref = r.string("ref");
    if (out.ref.empty()) fail(r.at("ref"), "must not be empty");
  }
  return out;
}

StepOutput step_output_from_json(const json& j, const std::string& path, DecodeContext& ctx) {
  ObjectReader r(j, path, ctx);
  StepOutput out;
  out.step_index = r.index("step_index");
  out.kind = r.enumeration<OutputKind>("kind", parse_output_kind);
  out.value_ref = r.string("value_ref");
  out.produced_at = r.timestamp("produced_at");
  return out;
}

Step step_from_json(const json& j, const std::string& path, DecodeContext& ctx) {
  ObjectReader r(j, path, ctx);
  Step s;
  s.index = r.index("index");
  s.text = r.string("text");
  if (r.optional("verb")) s.verb = r.string("verb");

  const json& data = r.array("data");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string cpath = r.at("data") + "[" + std::to_string(i) + "]";
    ObjectReader cr(data[i], cpath, ctx);
    DataCapsule c;
    c.label = cr.string("label");
    c.state = cr.enumeration<CapsuleState>("state", parse_capsule_state);
    if (const json* src = cr.optional("source")) {
      c.source = data_source_from_json(*src, cr.at("source"), ctx);
    }
    s.data.push_back(std::move(c));
  }

  if (const json* a = r.optional("action")) {
    ObjectReader ar(*a, r.at("action"), ctx);
    ActionBinding b;
    b.action_id = ar.string("action_id");
    b.verb = ar.string("verb");
    b.score = ar.number("score");
    const json& params = ar.required("parameters");
    if (!params.is_object()) fail(ar.at("parameters"), "expected an object");
    for (const auto& [label, value] : params.items()) {
      b.parameters.emplace(label, parameter_from_json(value, ar.at("parameters") + "." + label, ctx));
    }
    s.action = std::move(b);
  }

  const json& context = r.array("context");
  for (std::size_t i = 0; i < context.size(); ++i) {
    ObjectReader cr(context[i], r.at("context") + "[" + std::to_string(i) + "]", ctx);
    ContextAnnotation c;
    c.text = cr.string("text");
    c.kind = cr.enumeration<ContextKind>("kind", parse_context_kind);
    s.context.push_back(std::move(c));
  }

  if (const json* o = r.optional("output")) s.output = step_output_from_json(*o, r.at("output"), ctx);
  return s;
}

Workflow workflow_from_json(const json& j, DecodeContext& ctx) {
  if (!j.is_object()) fail("$", "expected an object");
  {
    auto it = j.find("version");
    if (it == j.end()) fail("$.version", "missing required field");
    if (!it->is_string()) fail("$.version", "expected a string");
    if (it->get<std::string>() != kFormatVersion) {
      throw Error(ErrorCode::version_mismatch,
                  "unsupported workflow format version '" + it->get<std::string>() +
                      "' (expected '" + std::string(kFormatVersion) + "')",
                  json{{"path", "$.version"}});
    }
  }

  ObjectReader r(j, "$", ctx);
  r.required("version");
  Workflow w;
  w.id = r.string("id");
  w.title = r.string("title");
  const json& steps = r.array("steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    w.steps.push_back(step_from_json(steps[i], "$.steps[" + std::to_string(i) + "]", ctx));
  }
  w.status = r.enumeration<WorkflowStatus>("status", parse_workflow_status);
  if (const json* s = r.optional("schedule")) {
    ObjectReader sr(*s, r.at("schedule"), ctx);
    Schedule sch;
    sch.expression = sr.string("expression");
    sch.timezone = sr.string("timezone");
    sch.next_fire = sr.timestamp("next_fire");
    w.schedule = std::move(sch);
  }
  const json& history = r.array("refinement_history");
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::string hpath = "$.refinement_history[" + std::to_string(i) + "]";
    ObjectReader hr(history[i], hpath, ctx);
    RefinementRecord rec;
    rec.iteration = hr.index("iteration");
    rec.feedback = hr.string("feedback");
    rec.plan_before = string_list(hr.array("plan_before"), hr.at("plan_before"));
    rec.plan_after = string_list(hr.array("plan_after"), hr.at("plan_after"));
    rec.approved = hr.boolean("approved");
    w.refinement_history.push_back(std::move(rec));
  }
  w.created_at = r.timestamp("created_at");
  w.updated_at = r.timestamp("updated_at");
  return w;
}

std::string serialize(const Workflow& workflow) { return canonical_text(to_json(workflow)); }

Deserialized deserialize(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("$: malformed JSON at byte ") +
                                            std::to_string(e.byte) + ": " + e.what(),
                json{{"path", "$"}, {"byte", e.byte}});
  }
  DecodeContext ctx;
  Workflow w = workflow_from_json(doc, ctx);
  return {std::move(w), std::move(ctx.warnings)};
}

}  // namespace intentflow::model
