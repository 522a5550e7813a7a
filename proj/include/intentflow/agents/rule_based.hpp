#pragma once

#include "intentflow/agents/gateway.hpp"

#include <functional>
#include <map>

namespace intentflow::agents {

/// Deterministic provider answering each role with a local function of
/// the request payload.
class RuleBasedProvider : public Provider {
public:
  using Handler = std::function<nlohmann::json(const nlohmann::json& payload)>;

  explicit RuleBasedProvider(Handler handler) : handler_(std::move(handler)) {}

  ProviderKind kind() const override { return ProviderKind::rule_based; }
  nlohmann::json complete(const AgentRequest& request, std::chrono::milliseconds timeout) override;

private:
  Handler handler_;
};

}  // namespace intentflow::agents
