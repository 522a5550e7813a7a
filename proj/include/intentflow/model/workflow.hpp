#pragma once

#include "intentflow/time.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace intentflow::model {

enum class WorkflowStatus { draft, ready, running, succeeded, failed };
enum class CapsuleState { unresolved, resolved };
enum class SourceKind { file, url, database, upstream };
enum class ContextKind { format, constraint, destination, other };
enum class OutputKind { file, table, text, url };

std::string_view to_string(WorkflowStatus v);
std::string_view to_string(CapsuleState v);
std::string_view to_string(SourceKind v);
std::string_view to_string(ContextKind v);
std::string_view to_string(OutputKind v);

// Parsers return nullopt for unknown names.
std::optional<WorkflowStatus> parse_workflow_status(std::string_view s);
std::optional<SourceKind> parse_source_kind(std::string_view s);
std::optional<ContextKind> parse_context_kind(std::string_view s);
std::optional<OutputKind> parse_output_kind(std::string_view s);

/// Where a capsule's data comes from. `ref` is a path, URL or database
/// reference; `step_index` is set only for upstream references.
struct DataSource {
  SourceKind kind = SourceKind::file;
  std::string ref;
  std::optional<std::size_t> step_index;

  static DataSource file(std::string path) { return {SourceKind::file, std::move(path), {}}; }
  static DataSource url(std::string u) { return {SourceKind::url, std::move(u), {}}; }
  static DataSource database(std::string r) { return {SourceKind::database, std::move(r), {}}; }
  static DataSource upstream(std::size_t index) { return {SourceKind::upstream, {}, index}; }

  bool operator==(const DataSource&) const = default;
};

struct DataCapsule {
  std::string label;
  CapsuleState state = CapsuleState::unresolved;
  std::optional<DataSource> source;

  bool resolved() const { return state == CapsuleState::resolved; }
  bool operator==(const DataCapsule&) const = default;
};

struct ContextAnnotation {
  std::string text;
  ContextKind kind = ContextKind::other;
  bool operator==(const ContextAnnotation&) const = default;
};

/// A bound parameter is either a data source or literal text (taken from
/// the step's context, e.g. a target language).
using ParameterValue = std::variant<DataSource, std::string>;

struct ActionBinding {
  std::string action_id;
  std::string verb;
  double score = 0.0;
  std::map<std::string, ParameterValue> parameters;
  bool operator==(const ActionBinding&) const = default;
};

struct StepOutput {
  std::size_t step_index = 0;
  OutputKind kind = OutputKind::text;
  std::string value_ref;
  Timestamp produced_at{};
  bool operator==(const StepOutput&) const = default;
};

struct Step {
  std::size_t index = 0;
  std::string text;
  /// Extracted action verb, kept while the step waits for a binding.
  std::string verb;
  std::vector<DataCapsule> data;
  std::optional<ActionBinding> action;
  std::vector<ContextAnnotation> context;
  std::optional<StepOutput> output;

  /// Every capsule resolved and an action bound.
  bool fully_resolved() const;
  bool operator==(const Step&) const = default;
};

struct RefinementRecord {
  std::size_t iteration = 0;
  std::string feedback;
  std::vector<std::string> plan_before;
  std::vector<std::string> plan_after;
  bool approved = false;
  bool operator==(const RefinementRecord&) const = default;
};

struct Schedule {
  std::string expression;
  std::string timezone;
  Timestamp next_fire{};
  bool operator==(const Schedule&) const = default;
};

struct Workflow {
  std::string id;
  std::string title;
  std::vector<Step> steps;
  WorkflowStatus status = WorkflowStatus::draft;
  std::optional<Schedule> schedule;
  std::vector<RefinementRecord> refinement_history;
  Timestamp created_at{};
  Timestamp updated_at{};

  std::vector<std::string> plan_texts() const;
  bool approved() const;
  bool operator==(const Workflow&) const = default;
};

}  // namespace intentflow::model
