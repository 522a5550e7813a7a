#pragma once

#include "intentflow/agents/gateway.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace intentflow::query {

enum class Option { reformulation, expansion, decomposition };

std::string_view to_string(Option o);
std::optional<Option> parse_option(std::string_view s);

struct RawQuery {
  std::string text;
  std::optional<std::string> locale;
};

struct RefinedQuery {
  std::string text;
  Option option_applied = Option::reformulation;
  /// One clause, or two or more when decomposed.
  std::vector<std::string> clauses;

  bool operator==(const RefinedQuery&) const = default;
};

nlohmann::json to_json(const RefinedQuery& q);
RefinedQuery refined_query_from_json(const nlohmann::json& j);

/// Rule-based policy: two or more clause boundaries -> decomposition; a
/// single clause with fewer than four content tokens -> expansion;
/// otherwise reformulation.
Option select_option(const RawQuery& q);

/// Rule-based G_Q. Throws Error(empty_query) when nothing but filler
/// words remain.
RefinedQuery rule_based_process(const RawQuery& q, Option option);

/// Slots appended by expansion, e.g. "(target language?)".
std::vector<std::string> expansion_slots(std::string_view clause);

/// Runs query processing through the gateway's query_processor role.
class QueryProcessor {
public:
  explicit QueryProcessor(const agents::Gateway& gateway) : gateway_(gateway) {}

  /// Applies `option` when given, otherwise lets the agent choose.
  RefinedQuery process(const RawQuery& q, std::optional<Option> option = std::nullopt) const;

private:
  const agents::Gateway& gateway_;
};

/// Instruction text sent with query_processor requests.
std::string_view query_instruction();

/// The rule-based provider's answer for a query_processor payload
/// {"text", "option"?}.
nlohmann::json rule_based_respond(const nlohmann::json& payload);

}  // namespace intentflow::query
