#pragma once

#include "intentflow/actions/pool.hpp"
#include "intentflow/agents/gateway.hpp"
#include "intentflow/extraction/extractor.hpp"
#include "intentflow/ids.hpp"
#include "intentflow/model/workflow.hpp"
#include "intentflow/planning/planner.hpp"
#include "intentflow/query/query_processor.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace intentflow::suggest {

inline constexpr std::chrono::seconds kSuggestionLifetime{3600};

struct RenderedLabel {
  std::string label;
  model::CapsuleState state = model::CapsuleState::unresolved;
  bool operator==(const RenderedLabel&) const = default;
};

struct RenderedStep {
  std::string text;
  std::vector<RenderedLabel> data_labels_with_state;
  std::string action_verb;
  std::vector<model::ContextAnnotation> context;
  /// Display line: the verb in **bold**, unresolved labels as [label],
  /// labels fed by an earlier step as {label}.
  std::string display;
  bool operator==(const RenderedStep&) const = default;
};

struct Suggestion {
  std::string id;
  std::string source_prompt;
  query::RefinedQuery refined;
  planning::Plan plan;
  extraction::EntitySet entity_set;
  std::vector<RenderedStep> rendered_steps;
  Timestamp expires_at{};
  bool operator==(const Suggestion&) const = default;
};

nlohmann::json to_json(const Suggestion& s);
Suggestion suggestion_from_json(const nlohmann::json& j);

/// Capsule states as materialization would set them: labels that refer
/// back to an earlier step are resolved, everything else waits for a
/// source.
std::vector<RenderedStep> render(const planning::Plan& plan, const extraction::EntitySet& entities);

/// Builds a draft workflow from a plan: materializes the entities, then
/// retrieves and maps an action for every step (left unbound when the
/// pool is empty). `history` is kept as the refinement history.
model::Workflow compose_workflow(const agents::Gateway& gateway, const std::vector<actions::ActionDescriptor>& pool,
                                 std::string id, std::string title, const std::vector<std::string>& plan,
                                 const extraction::EntitySet& entities, model::Workflow base = {});

/// prompt -> refined query -> plan -> entities, cached as single-use
/// suggestion files under `dir`.
class SuggestionPipeline {
public:
  using SaveWorkflow = std::function<void(const model::Workflow&)>;

  SuggestionPipeline(const agents::Gateway& gateway, std::shared_ptr<actions::ActionPool> pool,
                     std::filesystem::path dir, Clock clock, std::shared_ptr<IdGenerator> ids);

  /// Errors: bad_request for an empty prompt; stage errors (empty_query,
  /// planning_failed, extraction_failed, provider errors) with
  /// details.stage naming the failing stage.
  Suggestion suggest(const std::string& prompt);

  /// Errors: not_found (unknown or expired).
  Suggestion get(const std::string& id) const;

  /// Composes the workflow, consumes the suggestion and saves the result.
  /// Errors: not_found, suggestion_consumed.
  model::Workflow apply(const std::string& id, const SaveWorkflow& save);

  /// Discards the suggestion; suggests again when a new prompt is given.
  /// Errors: not_found, suggestion_consumed.
  std::optional<Suggestion> reject(const std::string& id, const std::optional<std::string>& new_prompt);

  /// Deletes expired suggestion files. Returns how many.
  std::size_t purge_expired();

private:
  std::filesystem::path file_of(const std::string& id) const;
  std::filesystem::path consumed_of(const std::string& id) const;
  void take(const std::string& id);

  const agents::Gateway& gateway_;
  std::shared_ptr<actions::ActionPool> pool_;
  std::filesystem::path dir_;
  Clock clock_;
  std::shared_ptr<IdGenerator> ids_;
  std::mutex mutex_;
};

}  // namespace intentflow::suggest
