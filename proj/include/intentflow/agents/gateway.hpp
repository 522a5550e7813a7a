#pragma once

#include <json.hpp>

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace intentflow::agents {

enum class Role { query_processor, planner, entity_extractor, mapper, refiner };
enum class Determinism { deterministic, sampled };
enum class ProviderKind { rule_based, external_model };

std::string_view to_string(Role r);
std::string_view to_string(ProviderKind k);
std::optional<Role> parse_role(std::string_view s);

inline constexpr Role kAllRoles[] = {Role::query_processor, Role::planner,
                                     Role::entity_extractor, Role::mapper, Role::refiner};

struct AgentRequest {
  Role role = Role::planner;
  std::string instruction;
  nlohmann::json payload;
  Determinism determinism = Determinism::deterministic;
};

struct AgentResponse {
  nlohmann::json content;
  ProviderKind provider = ProviderKind::rule_based;
  std::chrono::microseconds latency{0};
};

/// A backend able to answer agent requests. Implementations must be safe
/// for concurrent calls.
class Provider {
public:
  virtual ~Provider() = default;
  virtual ProviderKind kind() const = 0;
  /// Returns the raw response content. May throw Error(provider_unavailable)
  /// or Error(timeout).
  virtual nlohmann::json complete(const AgentRequest& request,
                                  std::chrono::milliseconds timeout) = 0;
};

/// Returns a description of why `content` does not match the response
/// grammar of the request's role, or nullopt when it does. Any role may
/// answer {"error": code, "message": text} with a code from its error set.
std::optional<std::string> check_response(const AgentRequest& request,
                                          const nlohmann::json& content);

/// Routes each stage's request to the provider registered for its role.
class Gateway {
public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{30'000};

  void register_provider(Role role, std::shared_ptr<Provider> provider);
  void unregister_provider(Role role);
  bool has_provider(Role role) const;
  std::optional<ProviderKind> provider_kind(Role role) const;

  void set_timeout(std::chrono::milliseconds timeout);

  /// Errors: provider_unavailable (no provider, or the provider failed),
  /// malformed_response (external output failed the role grammar twice),
  /// timeout.
  AgentResponse invoke(const AgentRequest& request) const;

private:
  std::shared_ptr<Provider> provider_for(Role role) const;

  mutable std::shared_mutex mutex_;
  std::map<Role, std::shared_ptr<Provider>> providers_;
  std::chrono::milliseconds timeout_ = kDefaultTimeout;
};

}  // namespace intentflow::agents
