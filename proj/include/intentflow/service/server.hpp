#pragma once

#include "intentflow/service/router.hpp"

#include <functional>
#include <memory>
#include <string>

namespace intentflow::service {

/// HTTP front end over a Router. GET /runs/{id}/events streams live as
/// text/event-stream and honours Last-Event-ID (or ?after=N).
class HttpServer {
public:
  explicit HttpServer(Router& router);
  ~HttpServer();

  /// Binds (port 0 picks a free one) and returns the bound port.
  /// Errors: internal when the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace intentflow::service
