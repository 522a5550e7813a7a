#include "intentflow/agents/external.hpp"

#include "intentflow/actions/mapping.hpp"
#include "intentflow/agents/rule_based.hpp"
#include "intentflow/error.hpp"
#include "intentflow/extraction/extractor.hpp"
#include "intentflow/planning/planner.hpp"
#include "intentflow/query/query_processor.hpp"

#include <httplib.h>

#include <cstdlib>

namespace intentflow::agents {

using json = nlohmann::json;

std::optional<ExternalConfig> external_config_from_env() {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  ExternalConfig c{env("INTENTFLOW_LLM_ENDPOINT"), env("INTENTFLOW_LLM_API_KEY"), env("INTENTFLOW_LLM_MODEL")};
  if (c.endpoint.empty()) return std::nullopt;
  if (c.model.empty()) c.model = "gpt-4o-mini";
  return c;
}

namespace {

/// Strips a ```json fence some models wrap around their answer.
std::string unfence(std::string text) {
  const auto open = text.find("```");
  if (open == std::string::npos) return text;
  auto start = text.find('\n', open);
  const auto close = text.rfind("```");
  if (start == std::string::npos || close <= start) return text;
  return text.substr(start + 1, close - start - 1);
}

}  // namespace

json ExternalProvider::complete(const AgentRequest& request, std::chrono::milliseconds timeout) {
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::provider_unavailable, "LLM endpoint is not an absolute URL: " + config_.endpoint);
  }
  const auto slash = config_.endpoint.find('/', scheme + 3);
  const std::string origin = slash == std::string::npos ? config_.endpoint : config_.endpoint.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);

  json body{{"model", config_.model},
            {"temperature", request.determinism == Determinism::deterministic ? 0.0 : 0.7},
            {"messages", json::array({{{"role", "system"}, {"content", request.instruction}},
                                      {{"role", "user"}, {"content", request.payload.dump()}}})}};

  httplib::Client cli(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout).count();
  cli.set_connection_timeout(std::max<long>(1, static_cast<long>(secs)));
  cli.set_read_timeout(std::max<long>(1, static_cast<long>(secs)));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto res = cli.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::timeout, "LLM request timed out: " + httplib::to_string(res.error()));
    }
    throw Error(ErrorCode::provider_unavailable, "LLM request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::provider_unavailable, "LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
    return json();  // fails the role grammar; the gateway retries then reports malformed_response
  }
  const std::string text = reply["choices"][0]["message"].value("content", std::string());
  const json content = json::parse(unfence(text), nullptr, false);
  return content.is_discarded() ? json() : content;
}

std::shared_ptr<Gateway> make_gateway(bool offline) {
  auto g = std::make_shared<Gateway>();
  g->register_provider(Role::query_processor, std::make_shared<RuleBasedProvider>(query::rule_based_respond));
  g->register_provider(Role::planner, std::make_shared<RuleBasedProvider>(planning::rule_based_plan_respond));
  g->register_provider(Role::refiner, std::make_shared<RuleBasedProvider>(planning::rule_based_refine_respond));
  g->register_provider(Role::entity_extractor,
                       std::make_shared<RuleBasedProvider>(extraction::rule_based_extract_respond));
  g->register_provider(Role::mapper, std::make_shared<RuleBasedProvider>(actions::rule_based_map_respond));
  if (!offline) {
    if (auto cfg = external_config_from_env()) {
      auto ext = std::make_shared<ExternalProvider>(*cfg);
      for (Role r : kAllRoles) g->register_provider(r, ext);
    }
  }
  return g;
}

}  // namespace intentflow::agents
