#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace intentflow {

/// Stable machine-readable error codes. Every module error maps to exactly one.
enum class ErrorCode {
  bad_request,
  validation_failed,
  parse_error,
  version_mismatch,
  not_found,
  not_ready,
  conflict,
  suggestion_consumed,
  run_in_progress,
  empty_query,
  planning_failed,
  extraction_failed,
  index_mismatch,
  iteration_limit_exceeded,
  uninterpretable_feedback,
  plan_final,
  provider_unavailable,
  malformed_response,
  timeout,
  empty_pool,
  empty_text,
  invalid_expression,
  invalid_timezone,
  executor_failure,
  internal,
};

std::string_view to_string(ErrorCode code);

/// HTTP status class for a code: 400, 404, 409, 422 or 500.
int http_status(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

  /// The ApiError document: {code, details, message}.
  nlohmann::json to_json() const;

private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace intentflow
