#include "intentflow/exec/events.hpp"
#include "intentflow/model/serialize.hpp"
#include "intentflow/model/validate.hpp"
#include "intentflow/service/router.hpp"
#include "intentflow/service/server.hpp"
#include "intentflow/service/service.hpp"
#include "support.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace intentflow;
using namespace intentflow::service;
using nlohmann::json;

namespace {

struct Api {
  testing::TempDir dir;
  testing::ManualClock clock;
  Service svc;
  Router router{svc};

  Api() : svc(ServiceOptions{dir.path(), true, clock.clock(), 42, std::nullopt, nullptr}) {
    testing::install_riley_fixtures(dir.path());
  }

  std::pair<int, json> call(const std::string& method, const std::string& path, const json& body = nullptr) {
    Request req;
    req.method = method;
    req.path = path;
    if (!body.is_null()) req.body = body.dump();
    const auto r = router.handle(req);
    return {r.status, r.content_type == "application/json" ? json::parse(r.body) : json(r.body)};
  }

  json ok(const std::string& method, const std::string& path, const json& body = nullptr) {
    auto [status, doc] = call(method, path, body);
    INFO(method << " " << path << " -> " << status << " " << doc.dump());
    REQUIRE(status < 300);
    return doc;
  }

  std::string echo_workflow(const std::string& text = "hi") {
    model::Workflow w;
    w.title = "echo";
    model::Step step;
    step.text = "Echo " + text;
    step.verb = "Echo";
    step.action = model::ActionBinding{"echo_text", "Echo", 1.0, {{"text", text}}};
    w.steps.push_back(step);
    auto doc = json::parse(model::serialize(w));
    doc["id"] = "";
    return ok("POST", "/workflows", doc)["id"];
  }
};

std::vector<std::uint64_t> sse_ids(const std::string& body) {
  std::vector<std::uint64_t> ids;
  for (std::size_t at = body.find("id: "); at != std::string::npos; at = body.find("\nid: ", at + 1)) {
    const auto start = body[at] == '\n' ? at + 5 : at + 4;
    ids.push_back(std::stoull(body.substr(start, body.find('\n', start) - start)));
  }
  return ids;
}

}  // namespace

TEST_SUITE("service-api") {
  TEST_CASE("health and unknown routes") {
    Api a;
    CHECK(a.call("GET", "/health").first == 200);
    auto [status, doc] = a.call("GET", "/nope");
    CHECK(status == 404);
    CHECK(doc["code"] == "not_found");
    CHECK(a.call("GET", "/workflows/wf_missing").first == 404);
    CHECK(a.call("POST", "/suggestions", json("not an object")).first == 400);
  }

  TEST_CASE("Riley through the REST surface") {
    Api a;
    const auto golden = testing::fixture_json("goldens/riley.json");
    const auto s = a.ok("POST", "/suggestions", {{"prompt", golden["prompt"]}});
    auto w = a.ok("POST", "/suggestions/" + s["id"].get<std::string>() + "/apply");
    const std::string id = w["id"];
    CHECK(w["status"] == "draft");
    CHECK(a.call("POST", "/workflows/" + id + "/run").first == 400);

    w = a.ok("POST", "/workflows/" + id + "/data",
             {{"step", 0}, {"label", "website URL"}, {"source", {{"kind", "file"}, {"ref", "image_link.xlsx"}}}});
    CHECK(w["steps"][0]["data"][0]["state"] == "resolved");
    CHECK(w["status"] == "ready");

    const auto run = a.ok("POST", "/workflows/" + id + "/run");
    a.svc.wait_idle();
    const auto done = a.ok("GET", "/runs/" + run["id"].get<std::string>());
    CHECK(done["status"] == "succeeded");
    CHECK(a.ok("GET", "/workflows/" + id)["status"] == "succeeded");
  }

  TEST_CASE("echo run events are served with ids 0..3") {
    Api a;
    const auto id = a.echo_workflow();
    const auto run = a.ok("POST", "/workflows/" + id + "/run");
    a.svc.wait_idle();
    Request req{"GET", "/runs/" + run["id"].get<std::string>() + "/events", {}, {}};
    const auto r = a.router.handle(req);
    CHECK(r.content_type == "text/event-stream");
    CHECK(sse_ids(r.body) == std::vector<std::uint64_t>{0, 1, 2, 3});
    req.query["after"] = "1";
    CHECK(sse_ids(a.router.handle(req).body) == std::vector<std::uint64_t>{2, 3});
  }

  TEST_CASE("reorder creating a forward reference is refused") {
    Api a;
    const auto golden = testing::fixture_json("goldens/riley.json");
    const auto s = a.ok("POST", "/suggestions", {{"prompt", golden["prompt"]}});
    const std::string id = a.ok("POST", "/suggestions/" + s["id"].get<std::string>() + "/apply")["id"];
    const std::string before = a.svc.export_workflow(id);
    auto [status, doc] = a.call("PATCH", "/workflows/" + id + "/steps", {{"op", "reorder"}, {"from", 1}, {"to", 0}});
    CHECK(status == 400);
    CHECK(doc["code"] == "validation_failed");
    bool forward = false;
    for (const auto& v : doc["details"]["violations"]) forward = forward || v["rule"] == "forward data reference";
    CHECK(forward);
    CHECK(a.svc.export_workflow(id) == before);
  }

  TEST_CASE("step patches") {
    Api a;
    const auto golden = testing::fixture_json("goldens/riley.json");
    const auto s = a.ok("POST", "/suggestions", {{"prompt", golden["prompt"]}});
    const std::string id = a.ok("POST", "/suggestions/" + s["id"].get<std::string>() + "/apply")["id"];

    auto w = a.ok("PATCH", "/workflows/" + id + "/steps", {{"op", "add"}, {"text", "Send the results via email"}});
    REQUIRE(w["steps"].size() == 4);
    CHECK(w["steps"][3]["action"]["action_id"] == "send_email");

    // Removing step 1 repoints step 2's reference at step 0.
    w = a.ok("PATCH", "/workflows/" + id + "/steps", {{"op", "remove"}, {"index", 1}});
    REQUIRE(w["steps"].size() == 3);
    CHECK(w["steps"][1]["data"][0]["source"]["step_index"] == 0);
    CHECK(model::validate(model::deserialize(a.svc.export_workflow(id)).workflow).ok());

    w = a.ok("PATCH", "/workflows/" + id + "/steps", {{"op", "edit"}, {"index", 2}, {"text", "Upload the results"}});
    CHECK(w["steps"][2]["verb"] == "Upload");
    CHECK(a.call("PATCH", "/workflows/" + id + "/steps", {{"op", "remove"}, {"index", 9}}).first == 400);
    CHECK(a.call("PATCH", "/workflows/" + id + "/steps", {{"op", "fly"}}).first == 400);
  }

  TEST_CASE("refine through the API") {
    Api a;
    const auto golden = testing::fixture_json("goldens/riley.json");
    const auto s = a.ok("POST", "/suggestions", {{"prompt", golden["prompt"]}});
    const std::string id = a.ok("POST", "/suggestions/" + s["id"].get<std::string>() + "/apply")["id"];
    auto w = a.ok("POST", "/workflows/" + id + "/refine", {{"feedback", "replace download with send via email"}});
    CHECK(w["steps"][2]["text"] == "Send the results via email");
    CHECK(w["steps"][2]["action"]["action_id"] == "send_email");
    CHECK(w["refinement_history"].size() == 1);
    w = a.ok("POST", "/workflows/" + id + "/refine", {{"approve", true}});
    CHECK(w["refinement_history"][1]["approved"] == true);
    auto [status, doc] = a.call("POST", "/workflows/" + id + "/refine", {{"feedback", "remove step 1"}});
    CHECK(status == 409);
    CHECK(doc["code"] == "plan_final");
  }

  TEST_CASE("schedule and tick") {
    Api a;
    const auto id = a.echo_workflow();
    const auto sch = a.ok("POST", "/workflows/" + id + "/schedule",
                          {{"expression", "weekly Wed@09:00"}, {"timezone", "Europe/Berlin"}});
    CHECK(sch["next_fire"] == "2026-03-25T08:00:00Z");
    auto t = a.ok("POST", "/scheduler/tick", {{"now", "2026-03-25T07:00:00Z"}});
    CHECK(t["started"].empty());
    t = a.ok("POST", "/scheduler/tick", {{"now", "2026-03-25T08:00:00Z"}});
    CHECK(t["started"].size() == 1);
    a.svc.wait_idle();
    CHECK(a.call("POST", "/scheduler/tick", {{"now", "2026-03-01T00:00:00Z"}}).first == 400);
    a.ok("DELETE", "/workflows/" + id + "/schedule");
    CHECK(a.ok("GET", "/workflows/" + id)["schedule"].is_null());
  }

  TEST_CASE("a finishing run does not undo the schedule advance") {
    Api a;
    const auto id = a.echo_workflow();
    a.ok("POST", "/workflows/" + id + "/schedule", {{"expression", "daily@09:00"}, {"timezone", "UTC"}});
    auto fire = testing::ts("2026-03-25T09:00:00Z");
    for (int day = 0; day < 40; ++day) {
      const auto t = a.ok("POST", "/scheduler/tick", {{"now", format_utc(fire)}});
      fire += std::chrono::hours(24);
      a.svc.wait_idle();
      CHECK(t["started"].size() + t["skipped"].size() == 1);
      CHECK(a.ok("GET", "/workflows/" + id)["schedule"]["next_fire"] == format_utc(fire));
    }
  }

  TEST_CASE("actions listing and upload") {
    Api a;
    CHECK(a.ok("GET", "/actions").size() == 20);
    const json manifest{{"id", "shout"},
                        {"name", "shout"},
                        {"description", "Shout the text"},
                        {"parameter_schema", {{{"label", "text"}, {"kind", "text"}, {"required", true}}}},
                        {"executor_kind", "builtin"},
                        {"executor_config", {{"builtin", "echo"}}}};
    CHECK(a.call("POST", "/actions", manifest).first == 201);
    CHECK(a.call("POST", "/actions", manifest).first == 409);
    Request req{"POST", "/actions", {{"replace", "true"}}, manifest.dump()};
    CHECK(a.router.handle(req).status == 201);
    CHECK(a.ok("GET", "/actions").size() == 21);
    CHECK(a.call("POST", "/actions", json{{"id", "x"}}).first == 400);
    const auto found = a.ok("POST", "/actions/search", {{"texts", {"Shout the text"}}, {"k", 1}});
    CHECK(found[0]["candidates"][0]["action_id"] == "shout");
  }

  TEST_CASE("import stores as-is and export is canonical") {
    Api a;
    const std::string bytes = exec::read_file(testing::fixture("workflows/unknown_field.json"));
    Request put{"PUT", "/workflows/wf_hand_0001", {}, bytes};
    CHECK(a.router.handle(put).status == 200);
    const std::string exported = a.svc.export_workflow("wf_hand_0001");
    CHECK(exported == exec::read_file(testing::fixture("workflows/unknown_field.canonical.json")));
    put.body = exported;
    a.router.handle(put);
    CHECK(a.svc.export_workflow("wf_hand_0001") == exported);
    CHECK(a.call("DELETE", "/workflows/wf_hand_0001").first < 300);
    CHECK(a.call("GET", "/workflows/wf_hand_0001").first == 404);
  }
}

TEST_SUITE("http-server") {
  TEST_CASE("SSE resume over HTTP") {
    Api a;
    const auto id = a.echo_workflow();
    const auto run = a.ok("POST", "/workflows/" + id + "/run");
    a.svc.wait_idle();

    HttpServer server(a.router);
    const int port = server.bind("127.0.0.1", 0);
    std::thread t([&] { server.listen(); });
    httplib::Client cli("127.0.0.1", port);
    const std::string path = "/runs/" + run["id"].get<std::string>() + "/events";
    auto all = cli.Get(path);
    REQUIRE(all);
    CHECK(sse_ids(all->body) == std::vector<std::uint64_t>{0, 1, 2, 3});
    for (std::uint64_t k = 0; k < 4; ++k) {
      auto r = cli.Get(path, httplib::Headers{{"Last-Event-ID", std::to_string(k)}});
      REQUIRE(r);
      std::vector<std::uint64_t> want;
      for (auto i = k + 1; i < 4; ++i) want.push_back(i);
      CHECK(sse_ids(r->body) == want);
    }
    auto missing = cli.Get("/workflows/wf_nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    server.stop();
    t.join();
  }
}
