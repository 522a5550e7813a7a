#include "client.hpp"

#include <httplib.h>

#include <sstream>

namespace intentflow::cli {

namespace {

class LocalClient : public Client {
public:
  explicit LocalClient(service::ServiceOptions options) : service_(std::move(options)), router_(service_) {}

  service::Response call(const std::string& method, const std::string& path, const std::string& body) override {
    service::Request req;
    req.method = method;
    const auto q = path.find('?');
    req.path = path.substr(0, q);
    if (q != std::string::npos) {
      std::stringstream ss(path.substr(q + 1));
      std::string kv;
      while (std::getline(ss, kv, '&')) {
        const auto eq = kv.find('=');
        req.query[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
      }
    }
    req.body = body;
    return router_.handle(req);
  }

  void follow(const std::string& run_id, std::optional<std::uint64_t> after,
              const std::function<void(const std::string&)>& on_event) override {
    router_.stream_events(run_id, after, [&](const std::string& frame) {
      const auto at = frame.find("\ndata: ");
      const auto end = frame.find('\n', at + 1);
      on_event(frame.substr(at + 7, end - at - 7));
      return true;
    });
  }

private:
  service::Service service_;
  service::Router router_;
};

class RemoteClient : public Client {
public:
  explicit RemoteClient(std::string base) : base_(std::move(base)), http_(base_) {
    http_.set_connection_timeout(5);
    http_.set_read_timeout(300);
  }

  service::Response call(const std::string& method, const std::string& path, const std::string& body) override {
    httplib::Result res;
    const char* type = "application/json";
    if (method == "GET") res = http_.Get(path);
    else if (method == "POST") res = http_.Post(path, body, type);
    else if (method == "PUT") res = http_.Put(path, body, type);
    else if (method == "PATCH") res = http_.Patch(path, body, type);
    else if (method == "DELETE") res = http_.Delete(path);
    if (!res) throw ConnectionError("cannot reach " + base_ + ": " + httplib::to_string(res.error()));
    return {res->status, res->body, res->get_header_value("Content-Type")};
  }

  void follow(const std::string& run_id, std::optional<std::uint64_t> after,
              const std::function<void(const std::string&)>& on_event) override {
    // Reconnects with Last-Event-ID until the terminal event arrives.
    bool done = false;
    for (int attempt = 0; !done && attempt < 5; ++attempt) {
      httplib::Headers headers;
      if (after) headers.emplace("Last-Event-ID", std::to_string(*after));
      std::string buffer;
      std::string id;
      std::string event;
      std::string data;
      int status = 0;
      auto res = http_.Get(
          "/runs/" + run_id + "/events", headers,
          [&](const httplib::Response& r) {
            status = r.status;
            return r.status == 200;
          },
          [&](const char* bytes, std::size_t n) {
            buffer.append(bytes, n);
            for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n')) {
              std::string line = buffer.substr(0, nl);
              buffer.erase(0, nl + 1);
              if (!line.empty() && line.back() == '\r') line.pop_back();
              if (line.empty()) {
                if (!data.empty()) {
                  on_event(data);
                  if (!id.empty()) after = std::stoull(id);
                  if (event == "run_completed" || event == "run_failed") done = true;
                }
                id.clear();
                event.clear();
                data.clear();
              } else if (line.rfind("id: ", 0) == 0) {
                id = line.substr(4);
              } else if (line.rfind("event: ", 0) == 0) {
                event = line.substr(7);
              } else if (line.rfind("data: ", 0) == 0) {
                data = line.substr(6);
              }
            }
            return true;
          });
      if (!res && status == 0) throw ConnectionError("cannot reach " + base_ + ": " + httplib::to_string(res.error()));
      if (status != 200) {
        throw ConnectionError("event stream for " + run_id + " returned HTTP " + std::to_string(status));
      }
      if (!done) {
        // The stream closed without a terminal event; ask again from the last id.
        const auto r = call("GET", "/runs/" + run_id, {});
        if (r.status != 200) return;
      }
    }
  }

private:
  std::string base_;
  httplib::Client http_;
};

}  // namespace

std::unique_ptr<Client> local_client(service::ServiceOptions options) {
  return std::make_unique<LocalClient>(std::move(options));
}

std::unique_ptr<Client> remote_client(const std::string& base_url) { return std::make_unique<RemoteClient>(base_url); }

}  // namespace intentflow::cli
