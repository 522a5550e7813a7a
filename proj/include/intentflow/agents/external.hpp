#pragma once

#include "intentflow/agents/gateway.hpp"

#include <memory>
#include <optional>
#include <string>

namespace intentflow::agents {

/// Connection settings for an OpenAI-compatible chat completions endpoint.
struct ExternalConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string api_key;
  std::string model;
};

/// Reads INTENTFLOW_LLM_ENDPOINT, INTENTFLOW_LLM_API_KEY and
/// INTENTFLOW_LLM_MODEL. nullopt when no endpoint is set.
std::optional<ExternalConfig> external_config_from_env();

/// Sends the role instruction as the system message and the payload as a
/// JSON user message; the reply text must be a JSON document.
class ExternalProvider : public Provider {
public:
  explicit ExternalProvider(ExternalConfig config) : config_(std::move(config)) {}

  ProviderKind kind() const override { return ProviderKind::external_model; }
  nlohmann::json complete(const AgentRequest& request, std::chrono::milliseconds timeout) override;

private:
  ExternalConfig config_;
};

/// Every role answered by the rule-based handlers, or by the external
/// model when one is configured and `offline` is false.
std::shared_ptr<Gateway> make_gateway(bool offline);

}  // namespace intentflow::agents
