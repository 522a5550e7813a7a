#pragma once

#include "intentflow/model/workflow.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace intentflow::model {

// Rule names reported in violations. They are part of the API surface.
namespace rules {
inline constexpr const char* kNonContiguousIndices = "non-contiguous indices";
inline constexpr const char* kForwardDataReference = "forward data reference";
inline constexpr const char* kCapsuleStateMismatch = "capsule state mismatch";
inline constexpr const char* kMalformedUpstream = "malformed upstream reference";
inline constexpr const char* kUnresolvedInReady = "unresolved step in ready workflow";
inline constexpr const char* kEmptyContext = "empty context text";
inline constexpr const char* kOutputIndexMismatch = "output index mismatch";
inline constexpr const char* kRefinementIndices = "non-contiguous refinement history";
inline constexpr const char* kApprovalNotFinal = "approval not final";
}  // namespace rules

struct Violation {
  std::string rule;
  std::optional<std::size_t> step_index;
  std::string message;
  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view rule) const;
  nlohmann::json to_json() const;
};

/// Checks every workflow invariant. Never throws; the workflow is untouched.
ValidationReport validate(const Workflow& workflow);

}  // namespace intentflow::model
