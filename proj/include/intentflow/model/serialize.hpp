#pragma once

#include "intentflow/model/workflow.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace intentflow::model {

inline constexpr std::string_view kFormatVersion = "1";

/// Canonical text of a JSON document: sorted keys, two-space indent,
/// trailing newline.
std::string canonical_text(const nlohmann::json& doc);

/// Canonical single-line form, used for event lines.
std::string canonical_line(const nlohmann::json& doc);

nlohmann::json to_json(const DataSource& v);
nlohmann::json to_json(const ParameterValue& v);
nlohmann::json to_json(const StepOutput& v);
nlohmann::json to_json(const Step& v);
nlohmann::json to_json(const Workflow& v);

/// Collects warnings (unknown fields) while decoding. Paths use a
/// "$.steps[0].data[1]" notation.
struct DecodeContext {
  std::vector<std::string> warnings;
};

DataSource data_source_from_json(const nlohmann::json& j, const std::string& path,
                                 DecodeContext& ctx);
StepOutput step_output_from_json(const nlohmann::json& j, const std::string& path,
                                 DecodeContext& ctx);
ParameterValue parameter_from_json(const nlohmann::json& j, const std::string& path,
                                   DecodeContext& ctx);
Step step_from_json(const nlohmann::json& j, const std::string& path, DecodeContext& ctx);
Workflow workflow_from_json(const nlohmann::json& j, DecodeContext& ctx);

std::string serialize(const Workflow& workflow);

struct Deserialized {
  Workflow workflow;
  std::vector<std::string> warnings;
};

/// Throws Error(parse_error) naming the first offending path, or
/// Error(version_mismatch) for an unknown format version.
Deserialized deserialize(std::string_view bytes);

}  // namespace intentflow::model
