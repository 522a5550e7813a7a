#pragma once

#include "intentflow/exec/events.hpp"
#include "intentflow/service/service.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace intentflow::service {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// One server-sent event: id = seq, event = kind, data = the canonical
/// event line.
std::string sse_frame(const exec::RunEvent& e);

/// Parses the id of a Last-Event-ID header or `after` query value.
std::optional<std::uint64_t> parse_event_id(const std::string& text);

/// Maps the REST surface onto Service calls. Shared by the HTTP server and
/// the CLI's in-process mode so both behave identically.
///
///   GET    /health
///   POST   /suggestions                  {prompt}
///   GET    /suggestions/{id}
///   POST   /suggestions/{id}/apply
///   POST   /suggestions/{id}/reject      {prompt?}
///   GET    /workflows
///   POST   /workflows                    workflow document
///   GET    /workflows/{id}
///   PUT    /workflows/{id}               workflow document (import)
///   DELETE /workflows/{id}
///   PATCH  /workflows/{id}/steps         step patch
///   POST   /workflows/{id}/data          {step, label, source}
///   POST   /workflows/{id}/refine        {feedback} | {approve: true}
///   POST   /workflows/{id}/schedule      {expression, timezone}
///   DELETE /workflows/{id}/schedule
///   POST   /workflows/{id}/run
///   GET    /runs/{id}
///   GET    /runs/{id}/events             text/event-stream (see stream_events)
///   GET    /actions
///   POST   /actions                      manifest (?replace=true)
///   POST   /actions/search               {texts: [...], k?} -> candidate sets
///   POST   /scheduler/tick               {now?}
class Router {
public:
  explicit Router(Service& service) : service_(service) {}

  /// Never throws; errors become ApiError documents.
  Response handle(const Request& req) const;

  /// Writes SSE frames for events with seq > after until the run ends or
  /// `write` returns false. Errors: not_found.
  void stream_events(const std::string& run_id, std::optional<std::uint64_t> after,
                     const std::function<bool(const std::string& frame)>& write) const;

  Service& service() const { return service_; }

private:
  Response dispatch(const Request& req) const;

  Service& service_;
};

}  // namespace intentflow::service
