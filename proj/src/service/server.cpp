#include "intentflow/service/server.hpp"

#include "intentflow/error.hpp"
#include "intentflow/model/serialize.hpp"

#include <httplib.h>

#include <atomic>
#include <deque>

namespace intentflow::service {

struct HttpServer::Impl {
  Router& router;
  httplib::Server server;
  explicit Impl(Router& r) : router(r) {}
};

namespace {

Request to_request(const httplib::Request& r) {
  Request req;
  req.method = r.method;
  req.path = r.path;
  for (const auto& [k, v] : r.params) req.query[k] = v;
  req.body = r.body;
  return req;
}

void send(const Response& out, httplib::Response& res) {
  res.status = out.status;
  res.set_content(out.body, out.content_type);
}

}  // namespace

HttpServer::HttpServer(Router& router) : impl_(std::make_unique<Impl>(router)) {
  auto& svr = impl_->server;
  Router& rt = impl_->router;

  auto generic = [&rt](const httplib::Request& r, httplib::Response& res) { send(rt.handle(to_request(r)), res); };
  svr.Get(R"(/runs/([^/]+)/events)", [&rt](const httplib::Request& r, httplib::Response& res) {
    const std::string run_id = r.matches[1];
    std::optional<std::uint64_t> after;
    if (r.has_header("Last-Event-ID")) after = parse_event_id(r.get_header_value("Last-Event-ID"));
    if (r.has_param("after")) after = parse_event_id(r.get_param_value("after"));
    try {
      rt.service().get_run(run_id);
    } catch (const Error& e) {
      send({http_status(e.code()), model::canonical_text(e.to_json()), "application/json"}, res);
      return;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [&rt, run_id, after](std::size_t, httplib::DataSink& sink) {
      bool open = true;
      try {
        rt.stream_events(run_id, after, [&](const std::string& frame) {
          open = sink.write(frame.data(), frame.size());
          return open;
        });
      } catch (const std::exception& e) {
        const std::string frame = "event: error\ndata: " + std::string(e.what()) + "\n\n";
        sink.write(frame.data(), frame.size());
      }
      sink.done();
      return open;
    });
  });
  svr.Get(".*", generic);
  svr.Post(".*", generic);
  svr.Put(".*", generic);
  svr.Patch(".*", generic);
  svr.Delete(".*", generic);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::internal, "cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace intentflow::service
