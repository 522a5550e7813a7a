#include "intentflow/exec/builtins.hpp"

#include "intentflow/error.hpp"

#include <httplib.h>

namespace intentflow::exec {

namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::executor_failure, "not an absolute URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string checked(const httplib::Result& res, const std::string& url) {
  if (!res) {
    throw Error(ErrorCode::executor_failure, "request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::executor_failure, "request to " + url + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace

HttpHooks default_http_hooks() {
  HttpHooks h;
  h.get = [](const std::string& url) {
    const auto [origin, path] = split(url);
    httplib::Client cli(origin);
    cli.set_follow_location(true);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(30);
    return checked(cli.Get(path), url);
  };
  h.post_json = [](const std::string& url, const std::string& body) {
    const auto [origin, path] = split(url);
    httplib::Client cli(origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(60);
    return checked(cli.Post(path, body, "application/json"), url);
  };
  return h;
}

}  // namespace intentflow::exec
