#pragma once

#include "intentflow/service/router.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace intentflow::cli {

/// Raised when the remote service cannot be reached.
struct ConnectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The CLI's view of the service: either an in-process Service behind a
/// Router, or a remote server over HTTP. Both speak the same REST surface.
class Client {
public:
  virtual ~Client() = default;
  virtual service::Response call(const std::string& method, const std::string& path, const std::string& body = {}) = 0;
  /// Calls `on_event` with the data line of every event after `after`
  /// until the run ends.
  virtual void follow(const std::string& run_id, std::optional<std::uint64_t> after,
                      const std::function<void(const std::string& data)>& on_event) = 0;
};

std::unique_ptr<Client> local_client(service::ServiceOptions options);
std::unique_ptr<Client> remote_client(const std::string& base_url);

}  // namespace intentflow::cli
