#pragma once

#include "intentflow/agents/gateway.hpp"
#include "intentflow/model/workflow.hpp"
#include "intentflow/query/query_processor.hpp"
#include "intentflow/text/clauses.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace intentflow::planning {

/// Refinement iterations allowed before feedback is refused.
inline constexpr std::size_t kMaxIterations = 10;

struct Plan {
  std::vector<std::string> steps;
  std::size_t iteration = 0;
  bool final = false;

  bool operator==(const Plan&) const = default;
};

enum class FeedbackKind { approve, modify };

struct Feedback {
  std::string text;
  FeedbackKind kind = FeedbackKind::modify;

  static Feedback approve() { return {"approve", FeedbackKind::approve}; }
  static Feedback modify(std::string text) { return {std::move(text), FeedbackKind::modify}; }
};

// ---------------------------------------------------------------------------
// Rule-based planning

/// What the rewrite rules need to know about a clause.
struct ClauseFacts {
  std::string verb;          // canonical, lower case
  std::string object_head;   // lower case head noun of the direct object
  std::string object_core;   // determiner + object words, original case
};

ClauseFacts analyze_clause(const text::TokenList& clause);

struct RewriteContext {
  std::optional<ClauseFacts> first;
  std::optional<ClauseFacts> previous;
  std::size_t position = 0;
};

/// Turns one clause into an imperative step sentence: canonical verb,
/// pronoun objects resolved, unspecified entities named, implied
/// arguments added, web sources turned into URLs, anaphoric objects
/// fronted, bare result references qualified.
std::string rewrite_clause(text::TokenList clause, const RewriteContext& ctx);

/// Rule-based G_P.
std::vector<std::string> rule_based_plan(const query::RefinedQuery& q);

// ---------------------------------------------------------------------------
// Feedback edits

enum class EditKind { remove, append, replace, reorder };

std::string_view to_string(EditKind k);

struct Edit {
  EditKind kind = EditKind::append;
  std::size_t from = 0;   // remove / replace / reorder source (0-based)
  std::size_t to = 0;     // reorder destination (0-based)
  std::string text;       // append / replace step text
};

/// Interprets feedback such as "remove download", "add send via email",
/// "replace step 3 with send via email", "move step 1 to 2" (steps are
/// numbered from 1 in feedback). Returns nullopt when the text is not an
/// edit of the current plan.
std::optional<Edit> parse_feedback(std::string_view feedback, const std::vector<std::string>& steps);

std::vector<std::string> apply_edit(std::vector<std::string> steps, const Edit& edit);

// ---------------------------------------------------------------------------

struct RefineResult {
  Plan plan;
  model::RefinementRecord record;
};

/// Planning and refinement through the gateway's planner/refiner roles.
class Planner {
public:
  explicit Planner(const agents::Gateway& gateway) : gateway_(gateway) {}

  Plan plan(const query::RefinedQuery& q) const;

  /// Errors: plan_final, iteration_limit_exceeded, uninterpretable_feedback.
  RefineResult refine(const Plan& plan, const Feedback& feedback) const;

  /// Re-applies every record's feedback starting from the first record's
  /// plan_before.
  Plan replay(const std::vector<model::RefinementRecord>& history) const;

private:
  const agents::Gateway& gateway_;
};

std::string_view plan_instruction();
std::string_view refine_instruction();

/// Rule-based answers for planner payloads {"query": RefinedQuery} and
/// refiner payloads {"plan": [...], "feedback": text}.
nlohmann::json rule_based_plan_respond(const nlohmann::json& payload);
nlohmann::json rule_based_refine_respond(const nlohmann::json& payload);

}  // namespace intentflow::planning
