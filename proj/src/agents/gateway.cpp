#include "intentflow/agents/gateway.hpp"

#include "intentflow/error.hpp"

#include <mutex>
#include <set>

namespace intentflow::agents {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::query_processor: return "query_processor";
    case Role::planner: return "planner";
    case Role::entity_extractor: return "entity_extractor";
    case Role::mapper: return "mapper";
    case Role::refiner: return "refiner";
  }
  return "unknown";
}

std::string_view to_string(ProviderKind k) {
  return k == ProviderKind::rule_based ? "rule_based" : "external_model";
}

std::optional<Role> parse_role(std::string_view s) {
  for (Role r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

namespace {

bool non_empty_string(const json& j) { return j.is_string() && !j.get<std::string>().empty(); }

std::optional<std::string> check_string_list(const json& j, const char* field, bool allow_empty) {
  if (!j.is_array()) return std::string(field) + " must be an array";
  if (!allow_empty && j.empty()) return std::string(field) + " must not be empty";
  for (const auto& e : j) {
    if (!non_empty_string(e)) return std::string(field) + " entries must be non-empty strings";
  }
  return std::nullopt;
}

const std::set<std::string>& error_codes(Role role) {
  static const std::set<std::string> query{"empty_query"};
  static const std::set<std::string> refine{"uninterpretable_feedback"};
  static const std::set<std::string> none{};
  switch (role) {
    case Role::query_processor: return query;
    case Role::refiner: return refine;
    default: return none;
  }
}

std::optional<std::string> check_query(const json& c) {
  static const std::set<std::string> options{"reformulation", "expansion", "decomposition"};
  if (!c.contains("option") || !c["option"].is_string() ||
      !options.count(c["option"].get<std::string>())) {
    return "option must be one of reformulation|expansion|decomposition";
  }
  if (!c.contains("text") || !non_empty_string(c["text"])) return "text must be a non-empty string";
  if (!c.contains("clauses")) return "clauses missing";
  if (auto e = check_string_list(c["clauses"], "clauses", false)) return e;
  const bool decomposed = c["option"] == "decomposition";
  if (decomposed != (c["clauses"].size() >= 2)) {
    return "decomposition must produce two or more clauses, other options exactly one";
  }
  return std::nullopt;
}

std::optional<std::string> check_steps(const json& c) {
  if (!c.contains("steps")) return "steps missing";
  return check_string_list(c["steps"], "steps", false);
}

std::optional<std::string> check_entities(const AgentRequest& req, const json& c) {
  static const std::set<std::string> kinds{"format", "constraint", "destination", "other"};
  if (!c.contains("steps") || !c["steps"].is_array()) return "steps must be an array";
  const auto& steps = c["steps"];
  if (req.payload.contains("steps") && req.payload["steps"].size() != steps.size()) {
    return "one entity record per plan step expected";
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (!s.is_object()) return "entity record must be an object";
    if (!s.contains("step_index") || !s["step_index"].is_number_unsigned() ||
        s["step_index"].get<std::size_t>() != i) {
      return "step_index must equal the record position";
    }
    if (!s.contains("action_verb") || !s["action_verb"].is_string()) return "action_verb must be a string";
    if (!s.contains("data_labels")) return "data_labels missing";
    if (auto e = check_string_list(s["data_labels"], "data_labels", true)) return e;
    std::set<std::string> seen;
    for (const auto& l : s["data_labels"]) {
      if (!seen.insert(l.get<std::string>()).second) return "data_labels must be unique per step";
    }
    if (!s.contains("context") || !s["context"].is_array()) return "context must be an array";
    for (const auto& ctx : s["context"]) {
      if (!ctx.is_object() || !ctx.contains("text") || !non_empty_string(ctx["text"]) ||
          !ctx.contains("kind") || !ctx["kind"].is_string() ||
          !kinds.count(ctx["kind"].get<std::string>())) {
        return "context entries must be {text, kind}";
      }
    }
    if (s["action_verb"].get<std::string>().empty() &&
        !(s.contains("error") && s["error"].is_string())) {
      return "a step without an action_verb must carry an error";
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_mapping(const AgentRequest& req, const json& c) {
  if (!c.contains("action_id") || !non_empty_string(c["action_id"])) return "action_id must be a non-empty string";
  std::set<std::string> ids;
  if (req.payload.contains("candidates")) {
    for (const auto& cand : req.payload["candidates"]) ids.insert(cand.value("action_id", ""));
  }
  if (!ids.empty() && !ids.count(c["action_id"].get<std::string>())) {
    return "action_id must be one of the offered candidates";
  }
  if (c.contains("scores")) {
    if (!c["scores"].is_array()) return "scores must be an array";
    for (const auto& s : c["scores"]) {
      if (!s.is_object() || !s.contains("action_id") || !s["action_id"].is_string() ||
          !s.contains("score") || !s["score"].is_number()) {
        return "scores entries must be {action_id, score}";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_refine(const json& c) {
  static const std::set<std::string> kinds{"remove", "append", "replace", "reorder"};
  if (auto e = check_steps(c)) return e;
  if (!c.contains("edit") || !c["edit"].is_object() || !c["edit"].contains("kind") ||
      !c["edit"]["kind"].is_string() || !kinds.count(c["edit"]["kind"].get<std::string>())) {
    return "edit.kind must be one of remove|append|replace|reorder";
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> check_response(const AgentRequest& request, const json& content) {
  if (!content.is_object()) return "response must be a JSON object";
  if (content.contains("error")) {
    if (!content["error"].is_string() || !error_codes(request.role).count(content["error"].get<std::string>())) {
      return "error code not allowed for role " + std::string(to_string(request.role));
    }
    if (!content.contains("message") || !content["message"].is_string()) return "error needs a message";
    return std::nullopt;
  }
  switch (request.role) {
    case Role::query_processor: return check_query(content);
    case Role::planner: return check_steps(content);
    case Role::entity_extractor: return check_entities(request, content);
    case Role::mapper: return check_mapping(request, content);
    case Role::refiner: return check_refine(content);
  }
  return "unknown role";
}

void Gateway::register_provider(Role role, std::shared_ptr<Provider> provider) {
  std::unique_lock lock(mutex_);
  providers_[role] = std::move(provider);
}

void Gateway::unregister_provider(Role role) {
  std::unique_lock lock(mutex_);
  providers_.erase(role);
}

bool Gateway::has_provider(Role role) const { return provider_for(role) != nullptr; }

std::optional<ProviderKind> Gateway::provider_kind(Role role) const {
  auto p = provider_for(role);
  if (!p) return std::nullopt;
  return p->kind();
}

void Gateway::set_timeout(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  timeout_ = timeout;
}

std::shared_ptr<Provider> Gateway::provider_for(Role role) const {
  std::shared_lock lock(mutex_);
  auto it = providers_.find(role);
  return it == providers_.end() ? nullptr : it->second;
}

AgentResponse Gateway::invoke(const AgentRequest& request) const {
  if (request.instruction.empty()) {
    throw Error(ErrorCode::bad_request, "agent request instruction must not be empty");
  }
  auto provider = provider_for(request.role);
  if (!provider) {
    throw Error(ErrorCode::provider_unavailable,
                "no provider registered for role " + std::string(to_string(request.role)));
  }
  std::chrono::milliseconds timeout;
  {
    std::shared_lock lock(mutex_);
    timeout = timeout_;
  }

  const auto start = std::chrono::steady_clock::now();
  // External output gets one retry; rule-based output is deterministic so a
  // retry could not change it.
  const int attempts = provider->kind() == ProviderKind::external_model ? 2 : 1;
  std::string last_problem;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    json content = provider->complete(request, timeout);
    auto problem = check_response(request, content);
    if (!problem) {
      AgentResponse resp;
      resp.content = std::move(content);
      resp.provider = provider->kind();
      resp.latency = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now() - start);
      return resp;
    }
    last_problem = *problem;
  }
  throw Error(ErrorCode::malformed_response,
              std::string(to_string(request.role)) + " response failed validation: " + last_problem,
              json{{"role", std::string(to_string(request.role))}, {"problem", last_problem}});
}

}  // namespace intentflow::agents
