#include "intentflow/agents/rule_based.hpp"

namespace intentflow::agents {

nlohmann::json RuleBasedProvider::complete(const AgentRequest& request, std::chrono::milliseconds) {
  return handler_(request.payload);
}

}  // namespace intentflow::agents
