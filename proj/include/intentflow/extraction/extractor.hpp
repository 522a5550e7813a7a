#pragma once

#include "intentflow/agents/gateway.hpp"
#include "intentflow/model/workflow.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace intentflow::extraction {

inline constexpr const char* kNoVerbFound = "no-verb-found";

struct StepEntities {
  std::size_t step_index = 0;
  std::string action_verb;
  std::vector<std::string> data_labels;
  std::vector<model::ContextAnnotation> context;
  /// Set to kNoVerbFound when the step has no imperative head.
  std::optional<std::string> error;

  bool operator==(const StepEntities&) const = default;
};

struct EntitySet {
  std::vector<StepEntities> steps;

  /// Labels of every step, in order, duplicates across steps kept.
  std::vector<std::string> all_labels() const;
  bool operator==(const EntitySet&) const = default;
};

nlohmann::json to_json(const EntitySet& e);
EntitySet entity_set_from_json(const nlohmann::json& j);

/// Tags one step sentence. The leading verb is the action; the direct
/// object and prepositional phrases that name inputs are data; the rest
/// (format, destination, conditions) is context.
StepEntities rule_based_extract_step(std::size_t index, const std::string& text);
EntitySet rule_based_extract(const std::vector<std::string>& steps);

/// True when `label` is introduced by a definite determiner in `text`
/// ("the reviewed images").
bool is_anaphoric(const std::string& text, const std::string& label);

/// Step index an anaphoric label on step `index` refers to: result nouns
/// point at the previous step, other nouns at the nearest earlier step
/// mentioning the same head noun outside its verb.
std::optional<std::size_t> resolve_anaphora(const std::vector<std::string>& steps, std::size_t index,
                                            const std::string& label);

/// Writes capsules, verbs and context onto the workflow's steps.
/// Capsules already resolved from a file, URL or database under the same
/// label keep their source. Errors: index_mismatch.
model::Workflow materialize(const EntitySet& entities, model::Workflow workflow);

class EntityExtractor {
public:
  explicit EntityExtractor(const agents::Gateway& gateway) : gateway_(gateway) {}

  /// Errors: extraction_failed (empty plan or provider failure).
  EntitySet extract(const std::vector<std::string>& steps) const;

private:
  const agents::Gateway& gateway_;
};

std::string_view extract_instruction();
/// Rule-based answer to {"steps": [...]}.
nlohmann::json rule_based_extract_respond(const nlohmann::json& payload);

}  // namespace intentflow::extraction
