#include "intentflow/service/router.hpp"

#include "intentflow/actions/pool.hpp"
#include "intentflow/error.hpp"
#include "intentflow/model/serialize.hpp"

#include <iostream>
#include <sstream>
#include <vector>

namespace intentflow::service {

using json = nlohmann::json;

namespace {

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string seg;
  while (std::getline(ss, seg, '/')) {
    if (!seg.empty()) out.push_back(seg);
  }
  return out;
}

json body_json(const Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::bad_request, "request body is not valid JSON");
  return j;
}

Response doc(const json& j, int status = 200) { return {status, model::canonical_text(j), "application/json"}; }
Response workflow_doc(const model::Workflow& wf, int status = 200) {
  return {status, model::serialize(wf), "application/json"};
}

json schedule_json(const model::Schedule& s) {
  return {{"expression", s.expression}, {"timezone", s.timezone}, {"next_fire", format_utc(s.next_fire)}};
}

json tick_json(const schedule::TickResult& t) {
  return {{"started", t.started}, {"skipped", t.skipped}, {"failed", t.failed}};
}

[[noreturn]] void no_route(const Request& req) {
  throw Error(ErrorCode::not_found, "no route for " + req.method + " " + req.path);
}

}  // namespace

std::string sse_frame(const exec::RunEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + std::string(exec::to_string(e.kind)) +
         "\ndata: " + model::canonical_line(exec::to_json(e)) + "\n\n";
}

std::optional<std::uint64_t> parse_event_id(const std::string& text) {
  if (text.empty() || text.size() > 19) return std::nullopt;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  return std::stoull(text);
}

Response Router::handle(const Request& req) const {
  try {
    return dispatch(req);
  } catch (const Error& e) {
    return doc(e.to_json(), http_status(e.code()));
  } catch (const json::exception& e) {
    return doc(Error(ErrorCode::bad_request, std::string("malformed request: ") + e.what()).to_json(), 400);
  } catch (const std::exception& e) {
    std::clog << req.method << " " << req.path << ": " << e.what() << "\n";
    return doc(Error(ErrorCode::internal, e.what()).to_json(), 500);
  }
}

Response Router::dispatch(const Request& req) const {
  const auto seg = segments(req.path);
  const std::string& m = req.method;
  const std::size_t n = seg.size();
  if (n == 0) no_route(req);

  if (seg[0] == "health" && n == 1 && m == "GET") return doc({{"status", "ok"}});

  if (seg[0] == "suggestions") {
    if (n == 1 && m == "POST") {
      const json b = body_json(req);
      if (!b.contains("prompt") || !b["prompt"].is_string()) throw Error(ErrorCode::bad_request, "\"prompt\" is required");
      return doc(suggest::to_json(service_.suggest(b["prompt"].get<std::string>())), 201);
    }
    if (n == 2 && m == "GET") return doc(suggest::to_json(service_.get_suggestion(seg[1])));
    if (n == 3 && m == "POST" && seg[2] == "apply") return workflow_doc(service_.apply(seg[1]), 201);
    if (n == 3 && m == "POST" && seg[2] == "reject") {
      const json b = body_json(req);
      std::optional<std::string> prompt;
      if (b.contains("prompt") && b["prompt"].is_string()) prompt = b["prompt"].get<std::string>();
      auto next = service_.reject(seg[1], prompt);
      return next ? doc(suggest::to_json(*next), 201) : doc({{"rejected", seg[1]}});
    }
    no_route(req);
  }

  if (seg[0] == "workflows") {
    if (n == 1 && m == "GET") {
      json list = json::array();
      for (const auto& wf : service_.list_workflows()) list.push_back(model::to_json(wf));
      return doc(list);
    }
    if (n == 1 && m == "POST") {
      return workflow_doc(service_.create_workflow(model::deserialize(req.body).workflow), 201);
    }
    const std::string& id = seg[1];
    if (n == 2 && m == "GET") return {200, service_.export_workflow(id), "application/json"};
    if (n == 2 && m == "PUT") return workflow_doc(service_.import_workflow(id, req.body));
    if (n == 2 && m == "DELETE") {
      service_.delete_workflow(id);
      return doc({{"deleted", id}});
    }
    if (n == 3) {
      const std::string& what = seg[2];
      if (what == "steps" && m == "PATCH") return workflow_doc(service_.patch_steps(id, StepPatch::from_json(body_json(req))));
      if (what == "data" && m == "POST") {
        const json b = body_json(req);
        if (!b.contains("step") || !b["step"].is_number_unsigned()) {
          throw Error(ErrorCode::bad_request, "\"step\" must be a non-negative integer");
        }
        if (!b.contains("label") || !b["label"].is_string()) throw Error(ErrorCode::bad_request, "\"label\" is required");
        if (!b.contains("source")) throw Error(ErrorCode::bad_request, "\"source\" is required");
        model::DecodeContext ctx;
        model::DataSource src;
        try {
          src = model::data_source_from_json(b["source"], "$.source", ctx);
        } catch (const Error& e) {
          throw Error(ErrorCode::bad_request, e.what(), e.details());
        }
        return workflow_doc(service_.attach_data(id, b["step"].get<std::size_t>(), b["label"].get<std::string>(), src));
      }
      if (what == "refine" && m == "POST") {
        const json b = body_json(req);
        const bool approve = b.value("approve", false);
        std::optional<std::string> feedback;
        if (b.contains("feedback") && b["feedback"].is_string()) feedback = b["feedback"].get<std::string>();
        return workflow_doc(service_.refine(id, feedback, approve));
      }
      if (what == "schedule" && m == "POST") {
        const json b = body_json(req);
        if (!b.contains("expression") || !b["expression"].is_string() || !b.contains("timezone") ||
            !b["timezone"].is_string()) {
          throw Error(ErrorCode::bad_request, "\"expression\" and \"timezone\" are required");
        }
        return doc(schedule_json(service_.schedule(id, b["expression"].get<std::string>(), b["timezone"].get<std::string>())));
      }
      if (what == "schedule" && m == "DELETE") {
        service_.unschedule(id);
        return doc({{"unscheduled", id}});
      }
      if (what == "run" && m == "POST") return doc(exec::to_json(service_.start_run(id)), 201);
    }
    no_route(req);
  }

  if (seg[0] == "runs" && n >= 2) {
    const std::string& id = seg[1];
    if (n == 2 && m == "GET") return doc(exec::to_json(service_.get_run(id)));
    if (n == 3 && seg[2] == "events" && m == "GET") {
      // Buffered form: every frame after `after` up to the end of the run.
      std::optional<std::uint64_t> after;
      if (auto it = req.query.find("after"); it != req.query.end()) after = parse_event_id(it->second);
      std::string body;
      stream_events(id, after, [&](const std::string& frame) {
        body += frame;
        return true;
      });
      return {200, body, "text/event-stream"};
    }
    no_route(req);
  }

  if (seg[0] == "actions" && n == 1) {
    if (m == "GET") {
      json list = json::array();
      for (const auto& a : service_.list_actions()) list.push_back(actions::to_manifest(a));
      return doc(list);
    }
    if (m == "POST") {
      const bool replace = req.query.count("replace") && req.query.at("replace") == "true";
      return doc(actions::to_manifest(service_.add_action(body_json(req), replace)), 201);
    }
  }

  if (seg[0] == "actions" && n == 2 && seg[1] == "search" && m == "POST") {
    const json b = body_json(req);
    if (!b.contains("texts") || !b["texts"].is_array()) throw Error(ErrorCode::bad_request, "texts must be an array");
    std::size_t k = actions::kDefaultTopK;
    if (b.contains("k")) {
      if (!b["k"].is_number_unsigned()) throw Error(ErrorCode::bad_request, "k must be a positive integer");
      k = b["k"].get<std::size_t>();
    }
    const auto pool = service_.pool().snapshot();
    json out = json::array();
    for (const auto& t : b["texts"]) {
      if (!t.is_string()) throw Error(ErrorCode::bad_request, "texts must hold strings");
      out.push_back(actions::to_json(actions::retrieve(t.get<std::string>(), *pool, k, out.size())));
    }
    return doc(out);
  }

  if (seg[0] == "scheduler" && n == 2 && seg[1] == "tick" && m == "POST") {
    const json b = body_json(req);
    std::optional<Timestamp> now;
    if (b.contains("now") && b["now"].is_string()) now = parse_utc(b["now"].get<std::string>());
    return doc(tick_json(service_.tick(now)));
  }

  no_route(req);
}

void Router::stream_events(const std::string& run_id, std::optional<std::uint64_t> after,
                           const std::function<bool(const std::string&)>& write) const {
  service_.get_run(run_id);
  for (;;) {
    const auto batch = service_.events(run_id, after, std::chrono::milliseconds(500));
    for (const auto& e : batch) {
      if (!write(sse_frame(e))) return;
      after = e.seq;
      if (exec::is_terminal(e.kind)) return;
    }
    if (batch.empty() && (service_.run_finished(run_id) || !service_.executor().live_log(run_id))) return;
  }
}

}  // namespace intentflow::service
