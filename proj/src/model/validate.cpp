#include "intentflow/model/validate.hpp"

#include <algorithm>

namespace intentflow::model {

bool ValidationReport::has(std::string_view rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

nlohmann::json ValidationReport::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& v : violations) {
    nlohmann::json j;
    j["rule"] = v.rule;
    j["step_index"] = v.step_index ? nlohmann::json(*v.step_index) : nlohmann::json(nullptr);
    j["message"] = v.message;
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"violations", std::move(arr)}};
}

ValidationReport validate(const Workflow& workflow) {
  ValidationReport report;
  auto add = [&](const char* rule, std::optional<std::size_t> step, std::string msg) {
    report.violations.push_back({rule, step, std::move(msg)});
  };

  const auto& steps = workflow.steps;
  for (std::size_t pos = 0; pos < steps.size(); ++pos) {
    const Step& step = steps[pos];
    if (step.index != pos) {
      add(rules::kNonContiguousIndices, pos,
          "step at position " + std::to_string(pos) + " has index " +
              std::to_string(step.index));
    }

    for (const auto& capsule : step.data) {
      const bool has_source = capsule.source.has_value();
      if (capsule.resolved() != has_source) {
        add(rules::kCapsuleStateMismatch, pos,
            "capsule '" + capsule.label + "' is " +
                std::string(to_string(capsule.state)) +
                (has_source ? " but has a source" : " but has no source"));
      }
      if (!has_source) continue;
      const DataSource& src = *capsule.source;
      if (src.kind == SourceKind::upstream) {
        if (!src.step_index) {
          add(rules::kMalformedUpstream, pos,
              "capsule '" + capsule.label + "' upstream reference lacks a step index");
        } else if (*src.step_index >= pos) {
          add(rules::kForwardDataReference, pos,
              "capsule '" + capsule.label + "' reads output of step " +
                  std::to_string(*src.step_index));
        }
      } else if (src.step_index) {
        add(rules::kMalformedUpstream, pos,
            "capsule '" + capsule.label + "' has a step index on a " +
                std::string(to_string(src.kind)) + " source");
      }
    }

    if (step.action) {
      for (const auto& [label, value] : step.action->parameters) {
        const auto* src = std::get_if<DataSource>(&value);
        if (src && src->kind == SourceKind::upstream && src->step_index &&
            *src->step_index >= pos) {
          add(rules::kForwardDataReference, pos,
              "parameter '" + label + "' reads output of step " +
                  std::to_string(*src->step_index));
        }
      }
    }

    for (const auto& c : step.context) {
      if (c.text.empty()) add(rules::kEmptyContext, pos, "context annotation has empty text");
    }

    if (step.output && step.output->step_index != step.index) {
      add(rules::kOutputIndexMismatch, pos,
          "output recorded for step " + std::to_string(step.output->step_index));
    }

    if (workflow.status == WorkflowStatus::ready && !step.fully_resolved()) {
      add(rules::kUnresolvedInReady, pos, "workflow is ready but step is not fully resolved");
    }
  }

  const auto& history = workflow.refinement_history;
  for (std::size_t n = 0; n < history.size(); ++n) {
    if (history[n].iteration != n) {
      add(rules::kRefinementIndices, std::nullopt,
          "refinement record at position " + std::to_string(n) + " has iteration " +
              std::to_string(history[n].iteration));
    }
    if (history[n].approved && n + 1 != history.size()) {
      add(rules::kApprovalNotFinal, std::nullopt,
          "approved refinement record " + std::to_string(n) + " is not the last");
    }
  }

  return report;
}

}  // namespace intentflow::model
