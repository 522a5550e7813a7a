#include "intentflow/agents/external.hpp"
#include "intentflow/agents/gateway.hpp"
#include "intentflow/agents/rule_based.hpp"
#include "intentflow/extraction/extractor.hpp"
#include "intentflow/planning/planner.hpp"
#include "intentflow/query/query_processor.hpp"
#include "support.hpp"

#include <doctest.h>

#include <atomic>

using namespace intentflow;
using namespace intentflow::agents;
using nlohmann::json;

namespace {

const char* kRiley =
    "I want to review uploaded images from the website, check if there are people in those images, and download "
    "the results.";

/// Stands in for a hosted model: answers with whatever the test scripts.
class ScriptedProvider : public Provider {
public:
  explicit ScriptedProvider(std::function<json(const AgentRequest&)> f) : f_(std::move(f)) {}
  ProviderKind kind() const override { return ProviderKind::external_model; }
  json complete(const AgentRequest& r, std::chrono::milliseconds) override {
    ++calls;
    return f_(r);
  }
  std::atomic<int> calls{0};

private:
  std::function<json(const AgentRequest&)> f_;
};

AgentRequest planner_request(const json& query) {
  return {Role::planner, std::string(planning::plan_instruction()), json{{"query", query}}, Determinism::deterministic};
}

}  // namespace

TEST_SUITE("agent-gateway") {
  TEST_CASE("rule-based planner is deterministic over 1000 calls") {
    auto g = make_gateway(true);
    const auto q = query::rule_based_process({kRiley, std::nullopt}, query::Option::decomposition);
    const auto req = planner_request(query::to_json(q));
    const json first = g->invoke(req).content;
    REQUIRE(first["steps"].size() == 3);
    for (int i = 0; i < 1000; ++i) REQUIRE(g->invoke(req).content == first);
  }

  TEST_CASE("non-conforming external output twice is a malformed response") {
    Gateway g;
    auto p = std::make_shared<ScriptedProvider>([](const AgentRequest&) { return json("here are your steps!"); });
    g.register_provider(Role::planner, p);
    CHECK_ERROR_CODE(g.invoke(planner_request(json{{"text", "x"}})), ErrorCode::malformed_response);
    CHECK(p->calls == 2);
  }

  TEST_CASE("external output accepted on the retry") {
    Gateway g;
    std::atomic<int> n{0};
    auto p = std::make_shared<ScriptedProvider>([&](const AgentRequest&) {
      return n++ == 0 ? json("oops") : json{{"steps", {"Download the results"}}};
    });
    g.register_provider(Role::planner, p);
    const auto resp = g.invoke(planner_request(json::object()));
    CHECK(resp.provider == ProviderKind::external_model);
    CHECK(resp.content["steps"][0] == "Download the results");
  }

  TEST_CASE("extractor answer for the summary prompt matches the hand-checked fixture") {
    auto g = make_gateway(true);
    const auto resp = g->invoke({Role::entity_extractor, std::string(extraction::extract_instruction()),
                                 json{{"steps", {"Summarize recorded content into meeting minutes"}}},
                                 Determinism::deterministic});
    CHECK(resp.content == testing::fixture_json("goldens/extract_summarize.json"));
  }

  TEST_CASE("offline gateway registers rule-based providers for every role") {
    auto g = make_gateway(true);
    for (Role r : kAllRoles) CHECK(g->provider_kind(r) == ProviderKind::rule_based);
  }

  TEST_CASE("mixed mode: external mapper only") {
    auto g = make_gateway(true);
    auto p = std::make_shared<ScriptedProvider>([](const AgentRequest& r) {
      return json{{"action_id", r.payload["candidates"][0]["action_id"]}, {"scores", json::array()}};
    });
    g->register_provider(Role::mapper, p);
    CHECK(g->provider_kind(Role::mapper) == ProviderKind::external_model);
    CHECK(g->provider_kind(Role::planner) == ProviderKind::rule_based);
  }

  TEST_CASE("unregistered role is unavailable") {
    auto g = make_gateway(true);
    g->unregister_provider(Role::planner);
    CHECK_FALSE(g->has_provider(Role::planner));
    CHECK_ERROR_CODE(g->invoke(planner_request(json::object())), ErrorCode::provider_unavailable);
  }

  TEST_CASE("role error answers pass through the grammar") {
    AgentRequest r = planner_request(json::object());
    // the planner has no error answers of its own
    CHECK(check_response(r, json{{"error", "planning_failed"}, {"message", "no verb"}}));
    CHECK(check_response(r, json{{"steps", json::array()}}));
    CHECK(check_response(r, json(42)));
    AgentRequest q{Role::query_processor, "", json::object(), Determinism::deterministic};
    CHECK_FALSE(check_response(q, json{{"error", "empty_query"}, {"message", "nothing left"}}));
    CHECK(check_response(q, json{{"error", "empty_query"}}));
    AgentRequest f{Role::refiner, "", json::object(), Determinism::deterministic};
    CHECK_FALSE(check_response(f, json{{"error", "uninterpretable_feedback"}, {"message", "?"}}));
  }

  TEST_CASE("environment configuration") {
    ::setenv("INTENTFLOW_LLM_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions", 1);
    ::unsetenv("INTENTFLOW_LLM_MODEL");
    auto cfg = external_config_from_env();
    REQUIRE(cfg);
    CHECK(cfg->model == "gpt-4o-mini");
    auto online = make_gateway(false);
    CHECK(online->provider_kind(Role::planner) == ProviderKind::external_model);
    CHECK(make_gateway(true)->provider_kind(Role::planner) == ProviderKind::rule_based);
    ::unsetenv("INTENTFLOW_LLM_ENDPOINT");
    CHECK_FALSE(external_config_from_env());
  }
}
