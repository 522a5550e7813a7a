// intentflow: headless front end of the workflow service.
//
// Without --server every command runs against an in-process service over
// the data directory; with --server (or INTENTFLOW_SERVER) it talks to a
// running `intentflow serve`.
//
// Exit codes: 0 ok, 1 followed run failed, 2 usage, 3 bad request (400),
// 4 not found (404), 5 conflict (409), 6 pipeline stage error (422),
// 7 internal (500), 8 service unreachable.

#include "client.hpp"

#include "intentflow/error.hpp"
#include "intentflow/exec/value.hpp"
#include "intentflow/model/serialize.hpp"
#include "intentflow/service/server.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace intentflow;

namespace {

int exit_code_for(int status) {
  if (status < 400) return 0;
  switch (status) {
    case 400: return 3;
    case 404: return 4;
    case 409: return 5;
    case 422: return 6;
    default: return 7;
  }
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

/// Prints the body of a successful response to stdout, or the ApiError to
/// stderr, and returns the exit code.
int report(const service::Response& r) {
  if (r.status < 400) {
    std::cout << r.body;
    if (!r.body.empty() && r.body.back() != '\n') std::cout << '\n';
    return 0;
  }
  const json err = json::parse(r.body, nullptr, false);
  if (err.is_object() && err.contains("code")) {
    std::cerr << "error: " << err.value("code", "") << ": " << err.value("message", "") << "\n";
    if (err.contains("details") && !err["details"].is_null()) std::cerr << err["details"].dump(2) << "\n";
  } else {
    std::cerr << "error: HTTP " << r.status << "\n" << r.body << "\n";
  }
  return exit_code_for(r.status);
}

std::string url_part(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

int serve(service::ServiceOptions options, const std::string& host, int port) {
  // Signals go to a dedicated thread so the server can be stopped cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Service svc(std::move(options));
  service::Router router(svc);
  service::HttpServer server(router);
  const int bound = server.bind(host, port);
  std::cerr << "listening on http://" << host << ":" << bound << " (data: " << svc.data_dir().string() << ")\n";
  std::cout << "http://" << host << ":" << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intentflow: turn natural-language requests into runnable workflows"};
  app.require_subcommand(1);

  bool offline = false;
  std::string data_dir = env_or("INTENTFLOW_DATA", "intentflow-data");
  std::string server_url = env_or("INTENTFLOW_SERVER", "");
  app.add_flag("--offline", offline, "Use the rule-based agents for every role");
  app.add_option("--data-dir", data_dir, "Data directory of the in-process service (env INTENTFLOW_DATA)");
  app.add_option("--server", server_url, "Base URL of a running service (env INTENTFLOW_SERVER)");

  std::string prompt;
  auto* suggest = app.add_subcommand("suggest", "Suggest a workflow for a request");
  suggest->add_option("prompt", prompt, "The request in plain language")->required();

  std::string id;
  auto* apply = app.add_subcommand("apply", "Turn a suggestion into a draft workflow");
  apply->add_option("suggestion-id", id)->required();

  std::optional<std::string> new_prompt;
  auto* reject = app.add_subcommand("reject", "Discard a suggestion, optionally suggesting again");
  reject->add_option("suggestion-id", id)->required();
  reject->add_option("--prompt", new_prompt, "Prompt for a fresh suggestion");

  std::size_t step = 0;
  std::string label;
  std::string file_ref, url_ref, db_ref;
  std::optional<std::size_t> upstream;
  auto* link = app.add_subcommand("link", "Link a data source to a step's capsule");
  link->add_option("workflow-id", id)->required();
  link->add_option("--step", step, "Step index (0-based)")->required();
  link->add_option("--label", label, "Capsule label")->required();
  auto* src_group = link->add_option_group("source");
  src_group->add_option("--file", file_ref, "Local file");
  src_group->add_option("--url", url_ref, "URL");
  src_group->add_option("--database", db_ref, "Table file standing in for a database");
  src_group->add_option("--upstream", upstream, "Output of an earlier step");
  src_group->require_option(1);

  std::optional<std::string> feedback;
  bool approve = false;
  auto* refine = app.add_subcommand("refine", "Edit the plan with feedback, or approve it");
  refine->add_option("workflow-id", id)->required();
  auto* fb_group = refine->add_option_group("feedback");
  fb_group->add_option("--feedback", feedback, "What to change");
  fb_group->add_flag("--approve", approve, "Accept the plan as final");
  fb_group->require_option(1);

  bool follow = false;
  auto* run = app.add_subcommand("run", "Run a workflow");
  run->add_option("workflow-id", id)->required();
  run->add_flag("--follow", follow, "Stream events to stdout, one document per line");

  std::optional<std::uint64_t> after;
  auto* events = app.add_subcommand("events", "Print a run's events, one document per line");
  events->add_option("run-id", id)->required();
  events->add_option("--after", after, "Only events with a larger seq");

  std::string expr, tz;
  bool clear = false;
  auto* schedule = app.add_subcommand("schedule", "Schedule a workflow (daily@HH:MM, weekly <DAY>@HH:MM or cron)");
  schedule->add_option("workflow-id", id)->required();
  schedule->add_option("--expr", expr, "Recurrence expression");
  schedule->add_option("--tz", tz, "IANA time zone")->default_val("UTC");
  schedule->add_flag("--clear", clear, "Remove the schedule");

  std::optional<std::string> now;
  auto* tick = app.add_subcommand("tick", "Fire due schedules");
  tick->add_option("--now", now, "Pretend time, YYYY-MM-DDTHH:MM:SSZ");

  auto* actions_cmd = app.add_subcommand("actions", "Action pool");
  actions_cmd->require_subcommand(1);
  actions_cmd->add_subcommand("list", "List registered actions");
  std::string manifest;
  bool replace = false;
  auto* actions_add = actions_cmd->add_subcommand("add", "Register an action manifest");
  actions_add->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);
  actions_add->add_flag("--replace", replace, "Replace an action with the same id");
  std::vector<std::string> search_texts;
  std::size_t top_k = 10;
  auto* actions_search = actions_cmd->add_subcommand("search", "Rank actions against step texts");
  actions_search->add_option("text", search_texts, "Step text (repeatable)")->required();
  actions_search->add_option("--k", top_k, "Candidates per text")->default_val(10);

  std::string file;
  auto* export_cmd = app.add_subcommand("export", "Write a workflow's canonical document to a file");
  export_cmd->add_option("workflow-id", id)->required();
  export_cmd->add_option("file", file)->required();
  auto* import_cmd = app.add_subcommand("import", "Store a workflow document under an id");
  import_cmd->add_option("workflow-id", id)->required();
  import_cmd->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* workflows = app.add_subcommand("workflows", "Inspect stored workflows");
  workflows->require_subcommand(1);
  workflows->add_subcommand("list", "List workflows");
  auto* wf_show = workflows->add_subcommand("show", "Print one workflow");
  wf_show->add_option("workflow-id", id)->required();
  auto* wf_delete = workflows->add_subcommand("delete", "Delete a workflow");
  wf_delete->add_option("workflow-id", id)->required();

  std::string add_text, edit_text, action_id;
  std::optional<std::size_t> at, remove_index, move_from, move_to, edit_index, bind_index;
  auto* steps = app.add_subcommand("steps", "Edit a workflow's steps");
  steps->add_option("workflow-id", id)->required();
  auto* ops = steps->add_option_group("operation");
  ops->add_option("--add", add_text, "Append (or insert with --at) a step");
  ops->add_option("--remove", remove_index, "Remove step N");
  ops->add_option("--move", move_from, "Move step N (with --to)");
  ops->add_option("--edit", edit_index, "Rewrite step N (with --text)");
  ops->add_option("--bind", bind_index, "Bind step N to an action (with --action)");
  ops->require_option(1);
  steps->add_option("--at", at, "Insert position for --add");
  steps->add_option("--to", move_to, "Destination for --move");
  steps->add_option("--text", edit_text, "New text for --edit");
  steps->add_option("--action", action_id, "Action id for --bind");

  std::string host = "127.0.0.1";
  int port = 8765;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API and event streams");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port, "0 picks a free port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  service::ServiceOptions options;
  options.data_dir = data_dir;
  options.offline = offline;

  if (*serve_cmd) {
    try {
      return serve(std::move(options), host, port);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 7;
    }
  }

  try {
    std::unique_ptr<cli::Client> client =
        server_url.empty() ? cli::local_client(std::move(options)) : cli::remote_client(server_url);
    auto& c = *client;

    if (*suggest) {
      const auto r = c.call("POST", "/suggestions", json{{"prompt", prompt}}.dump());
      if (r.status < 400) {
        const json s = json::parse(r.body);
        std::cerr << "suggestion " << s["id"].get<std::string>() << "\n";
        int n = 1;
        for (const auto& step_doc : s["rendered_steps"]) {
          std::cerr << "  (" << n++ << ") " << step_doc["display"].get<std::string>() << "\n";
        }
      }
      return report(r);
    }
    if (*apply) return report(c.call("POST", "/suggestions/" + url_part(id) + "/apply"));
    if (*reject) {
      json body = json::object();
      if (new_prompt) body["prompt"] = *new_prompt;
      return report(c.call("POST", "/suggestions/" + url_part(id) + "/reject", body.dump()));
    }
    if (*link) {
      json source;
      if (!file_ref.empty()) source = {{"kind", "file"}, {"ref", fs::absolute(file_ref).lexically_normal().string()}};
      else if (!url_ref.empty()) source = {{"kind", "url"}, {"ref", url_ref}};
      else if (!db_ref.empty()) source = {{"kind", "database"}, {"ref", fs::absolute(db_ref).lexically_normal().string()}};
      else source = {{"kind", "upstream"}, {"step_index", *upstream}};
      return report(c.call("POST", "/workflows/" + url_part(id) + "/data",
                           json{{"step", step}, {"label", label}, {"source", source}}.dump()));
    }
    if (*refine) {
      json body = approve ? json{{"approve", true}} : json{{"feedback", *feedback}};
      return report(c.call("POST", "/workflows/" + url_part(id) + "/refine", body.dump()));
    }
    if (*run) {
      const auto r = c.call("POST", "/workflows/" + url_part(id) + "/run");
      if (r.status >= 400 || !follow) return report(r);
      const std::string run_id = json::parse(r.body)["id"].get<std::string>();
      std::string last_kind;
      c.follow(run_id, std::nullopt, [&](const std::string& line) {
        std::cout << line << "\n" << std::flush;
        last_kind = json::parse(line).value("kind", "");
      });
      return last_kind == "run_completed" ? 0 : 1;
    }
    if (*events) {
      const auto r = c.call("GET", "/runs/" + url_part(id));
      if (r.status >= 400) return report(r);
      c.follow(id, after, [](const std::string& line) { std::cout << line << "\n" << std::flush; });
      return 0;
    }
    if (*schedule) {
      if (clear) return report(c.call("DELETE", "/workflows/" + url_part(id) + "/schedule"));
      if (expr.empty()) {
        std::cerr << "schedule needs --expr or --clear\n" << schedule->help();
        return 2;
      }
      return report(c.call("POST", "/workflows/" + url_part(id) + "/schedule",
                           json{{"expression", expr}, {"timezone", tz}}.dump()));
    }
    if (*tick) {
      json body = json::object();
      if (now) body["now"] = *now;
      return report(c.call("POST", "/scheduler/tick", body.dump()));
    }
    if (*actions_cmd) {
      if (actions_cmd->got_subcommand("list")) return report(c.call("GET", "/actions"));
      if (*actions_search) {
        return report(c.call("POST", "/actions/search", json{{"texts", search_texts}, {"k", top_k}}.dump()));
      }
      return report(c.call("POST", std::string("/actions") + (replace ? "?replace=true" : ""), exec::read_file(manifest)));
    }
    if (*export_cmd) {
      const auto r = c.call("GET", "/workflows/" + url_part(id));
      if (r.status >= 400) return report(r);
      exec::write_file_atomic(fs::absolute(file), r.body);
      std::cerr << "wrote " << file << "\n";
      return 0;
    }
    if (*import_cmd) return report(c.call("PUT", "/workflows/" + url_part(id), exec::read_file(file)));
    if (*workflows) {
      if (workflows->got_subcommand("list")) return report(c.call("GET", "/workflows"));
      if (workflows->got_subcommand("show")) return report(c.call("GET", "/workflows/" + url_part(id)));
      return report(c.call("DELETE", "/workflows/" + url_part(id)));
    }
    if (*steps) {
      json patch;
      if (!add_text.empty()) {
        patch = {{"op", "add"}, {"text", add_text}};
        if (at) patch["position"] = *at;
      } else if (remove_index) {
        patch = {{"op", "remove"}, {"index", *remove_index}};
      } else if (move_from) {
        if (!move_to) {
          std::cerr << "--move needs --to\n";
          return 2;
        }
        patch = {{"op", "reorder"}, {"from", *move_from}, {"to", *move_to}};
      } else if (edit_index) {
        patch = {{"op", "edit"}, {"index", *edit_index}, {"text", edit_text}};
      } else {
        if (action_id.empty()) {
          std::cerr << "--bind needs --action\n";
          return 2;
        }
        patch = {{"op", "bind"}, {"index", *bind_index}, {"action_id", action_id}};
      }
      return report(c.call("PATCH", "/workflows/" + url_part(id) + "/steps", patch.dump()));
    }
  } catch (const cli::ConnectionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 8;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(http_status(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  }
  return 2;
}
