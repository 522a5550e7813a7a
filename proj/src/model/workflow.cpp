#include "intentflow/model/workflow.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace intentflow::model {

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table,
                         E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "unknown";
}

constexpr std::array<std::pair<WorkflowStatus, std::string_view>, 5> kStatus{{
    {WorkflowStatus::draft, "draft"},
    {WorkflowStatus::ready, "ready"},
    {WorkflowStatus::running, "running"},
    {WorkflowStatus::succeeded, "succeeded"},
    {WorkflowStatus::failed, "failed"},
}};
constexpr std::array<std::pair<CapsuleState, std::string_view>, 2> kState{{
    {CapsuleState::unresolved, "unresolved"},
    {CapsuleState::resolved, "resolved"},
}};
constexpr std::array<std::pair<SourceKind, std::string_view>, 4> kSource{{
    {SourceKind::file, "file"},
    {SourceKind::url, "url"},
    {SourceKind::database, "database"},
    {SourceKind::upstream, "upstream"},
}};
constexpr std::array<std::pair<ContextKind, std::string_view>, 4> kContext{{
    {ContextKind::format, "format"},
    {ContextKind::constraint, "constraint"},
    {ContextKind::destination, "destination"},
    {ContextKind::other, "other"},
}};
constexpr std::array<std::pair<OutputKind, std::string_view>, 4> kOutput{{
    {OutputKind::file, "file"},
    {OutputKind::table, "table"},
    {OutputKind::text, "text"},
    {OutputKind::url, "url"},
}};

}  // namespace

std::string_view to_string(WorkflowStatus v) { return name_of(kStatus, v); }
std::string_view to_string(CapsuleState v) { return name_of(kState, v); }
std::string_view to_string(SourceKind v) { return name_of(kSource, v); }
std::string_view to_string(ContextKind v) { return name_of(kContext, v); }
std::string_view to_string(OutputKind v) { return name_of(kOutput, v); }

std::optional<WorkflowStatus> parse_workflow_status(std::string_view s) { return lookup(kStatus, s); }
std::optional<SourceKind> parse_source_kind(std::string_view s) { return lookup(kSource, s); }
std::optional<ContextKind> parse_context_kind(std::string_view s) { return lookup(kContext, s); }
std::optional<OutputKind> parse_output_kind(std::string_view s) { return lookup(kOutput, s); }

bool Step::fully_resolved() const {
  return action.has_value() &&
         std::all_of(data.begin(), data.end(),
                     [](const DataCapsule& c) { return c.resolved(); });
}

std::vector<std::string> Workflow::plan_texts() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.text);
  return out;
}

bool Workflow::approved() const {
  return std::any_of(refinement_history.begin(), refinement_history.end(),
                     [](const RefinementRecord& r) { return r.approved; });
}

}  // namespace intentflow::model
