#include "intentflow/error.hpp"

namespace intentflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::validation_failed: return "validation_failed";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::not_ready: return "not_ready";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::suggestion_consumed: return "suggestion_consumed";
    case ErrorCode::run_in_progress: return "run_in_progress";
    case ErrorCode::empty_query: return "empty_query";
    case ErrorCode::planning_failed: return "planning_failed";
    case ErrorCode::extraction_failed: return "extraction_failed";
    case ErrorCode::index_mismatch: return "index_mismatch";
    case ErrorCode::iteration_limit_exceeded: return "iteration_limit_exceeded";
    case ErrorCode::uninterpretable_feedback: return "uninterpretable_feedback";
    case ErrorCode::plan_final: return "plan_final";
    case ErrorCode::provider_unavailable: return "provider_unavailable";
    case ErrorCode::malformed_response: return "malformed_response";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::empty_pool: return "empty_pool";
    case ErrorCode::empty_text: return "empty_text";
    case ErrorCode::invalid_expression: return "invalid_expression";
    case ErrorCode::invalid_timezone: return "invalid_timezone";
    case ErrorCode::executor_failure: return "executor_failure";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request:
    case ErrorCode::validation_failed:
    case ErrorCode::parse_error:
    case ErrorCode::version_mismatch:
    case ErrorCode::not_ready:
    case ErrorCode::invalid_expression:
    case ErrorCode::invalid_timezone:
    case ErrorCode::index_mismatch:
      return 400;
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::conflict:
    case ErrorCode::suggestion_consumed:
    case ErrorCode::run_in_progress:
    case ErrorCode::plan_final:
      return 409;
    case ErrorCode::empty_query:
    case ErrorCode::planning_failed:
    case ErrorCode::extraction_failed:
    case ErrorCode::iteration_limit_exceeded:
    case ErrorCode::uninterpretable_feedback:
    case ErrorCode::provider_unavailable:
    case ErrorCode::malformed_response:
    case ErrorCode::timeout:
    case ErrorCode::empty_pool:
    case ErrorCode::empty_text:
      return 422;
    case ErrorCode::executor_failure:
    case ErrorCode::internal:
      return 500;
  }
  return 500;
}

nlohmann::json Error::to_json() const {
  nlohmann::json j;
  j["code"] = std::string(to_string(code_));
  j["message"] = what();
  j["details"] = details_;
  return j;
}

}  // namespace intentflow
