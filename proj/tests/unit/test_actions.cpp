#include "intentflow/actions/mapping.hpp"
#include "intentflow/actions/pool.hpp"
#include "intentflow/agents/external.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace intentflow;
using namespace intentflow::actions;

namespace {

std::vector<ActionDescriptor> pool20() {
  std::vector<ActionDescriptor> out;
  for (const auto& m : testing::fixture_json("pools/default20.json")) {
    auto a = from_manifest(m);
    a.embedding = embed_text(action_text(a));
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ActionDescriptor> subset(const std::vector<std::string>& ids) {
  std::vector<ActionDescriptor> out;
  for (const auto& a : pool20()) {
    if (std::find(ids.begin(), ids.end(), a.id) != ids.end()) out.push_back(a);
  }
  return out;
}

model::Step check_people_step() {
  model::Step s;
  s.index = 1;
  s.text = "Check the reviewed images if there are people present in them";
  s.verb = "Check";
  s.data.push_back({"reviewed images", model::CapsuleState::resolved, model::DataSource::upstream(0)});
  s.context.push_back({"if there are people present in them", model::ContextKind::constraint});
  return s;
}

ActionDescriptor simple(std::string id, std::string description) {
  ActionDescriptor a;
  a.id = id;
  a.name = std::move(id);
  a.description = std::move(description);
  a.executor_config = {{"builtin", "echo"}};
  return a;
}

}  // namespace

TEST_SUITE("action-pool") {
  TEST_CASE("embedding is deterministic and unit length") {
    CHECK(embed_text("send email") == embed_text("send email"));
    CHECK(std::abs(dot(embed_text("send email"), embed_text("send email")) - 1.0) < 1e-9);
    CHECK(embed_text("Send, EMAIL!") == embed_text("send email"));
    CHECK_ERROR_CODE(embed_text("!!! ..."), ErrorCode::empty_text);
  }

  TEST_CASE("pairwise cosines match the exact oracle") {
    const auto oracle = testing::fixture_json("oracles/pool20_cosines.json");
    const auto pool = pool20();
    REQUIRE(pool.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
      REQUIRE(pool[i].id == oracle["ids"][i]);
      for (std::size_t j = 0; j < 20; ++j) {
        CHECK(std::abs(dot(pool[i].embedding, pool[j].embedding) - oracle["cosines"][i][j].get<double>()) < 1e-12);
      }
    }
  }

  TEST_CASE("single action is the sole candidate") {
    const auto pool = subset({"echo_text"});
    const auto c = retrieve("Purchase a book", pool);
    REQUIRE(c.candidates.size() == 1);
    CHECK(c.candidates[0].action_id == "echo_text");
  }

  TEST_CASE("ranking over the 20-action pool matches the oracle") {
    const auto oracle = testing::fixture_json("oracles/pool20_ranking_send_email.json");
    const auto pool = pool20();
    const auto all = retrieve(oracle["text"].get<std::string>(), pool, 20);
    REQUIRE(all.candidates.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(all.candidates[i].action_id == oracle["ranking"][i]["action_id"]);
      CHECK(std::abs(all.candidates[i].similarity - oracle["ranking"][i]["similarity"].get<double>()) < 1e-12);
    }
    const auto top = retrieve(oracle["text"].get<std::string>(), pool);
    CHECK(top.candidates.size() == kDefaultTopK);
    CHECK(kDefaultTopK == 10);
  }

  TEST_CASE("equal similarity ranks by id") {
    std::vector<ActionDescriptor> pool{simple("b_copy", "copy file"), simple("a_copy", "copy file"),
                                       simple("c_other", "unrelated words")};
    const auto c = retrieve("copy file", pool);
    CHECK(c.candidates[0].action_id == "a_copy");
    CHECK(c.candidates[1].action_id == "b_copy");
  }

  TEST_CASE("retrieve errors") {
    CHECK_ERROR_CODE(retrieve("x", {}), ErrorCode::empty_pool);
    CHECK_ERROR_CODE(retrieve("...", pool20()), ErrorCode::empty_text);
    CHECK_ERROR_CODE(retrieve("x", pool20(), 0), ErrorCode::bad_request);
  }

  TEST_CASE("pool add, upsert, remove") {
    ActionPool p;
    p.add(simple("x", "do x"));
    CHECK_ERROR_CODE(p.add(simple("x", "again")), ErrorCode::conflict);
    CHECK_ERROR_CODE(p.add(simple("", "no id")), ErrorCode::validation_failed);
    p.upsert(simple("x", "do x differently"));
    CHECK(p.find("x")->description == "do x differently");
    CHECK(p.size() == 1);
    CHECK(p.remove("x"));
    CHECK(p.size() == 0);
  }

  TEST_CASE("manifest round trip") {
    for (const auto& a : pool20()) {
      auto back = from_manifest(to_manifest(a));
      back.embedding = a.embedding;
      CHECK(back == a);
    }
    CHECK_ERROR_CODE(from_manifest(nlohmann::json{{"id", "x"}}), ErrorCode::validation_failed);
  }
}

TEST_SUITE("action-mapping") {
  TEST_CASE("person detection wins with the hand-computed scores") {
    const auto golden = testing::fixture_json("oracles/mapping_check_people.json");
    const auto pool = subset({"check_people_in_images", "resize_images", "send_email"});
    const auto step = check_people_step();
    const auto result = map_action(step, retrieve(step.text, pool), pool);
    CHECK(result.binding.action_id == golden["selected"]);
    CHECK(result.binding.verb == "Check");
    for (const auto& want : golden["candidates"]) {
      CAPTURE(want["action_id"]);
      bool found = false;
      for (const auto& s : result.scores) {
        if (s.action_id != want["action_id"]) continue;
        found = true;
        CHECK(std::abs(s.similarity - want["similarity"].get<double>()) < 1e-12);
        CHECK(std::abs(s.score - want["score"].get<double>()) < 1e-12);
      }
      CHECK(found);
    }
    CHECK(std::holds_alternative<model::DataSource>(result.binding.parameters.at("images")));
  }

  TEST_CASE("single candidate is bound with its score") {
    const auto pool = subset({"resize_images"});
    const auto step = check_people_step();
    const auto cands = retrieve(step.text, pool);
    const auto result = map_action(step, cands, pool);
    CHECK(result.binding.action_id == "resize_images");
    CHECK(result.binding.score == doctest::Approx(mapping_score(cands.candidates[0].similarity, pool[0], step)));
    CHECK(result.missing == std::vector<std::string>{"width"});
  }

  TEST_CASE("equal scores go to the lower id") {
    CHECK(argmax({{"zeta", 0.5, 0.7}, {"alpha", 0.5, 0.7}, {"mid", 0.1, 0.2}}) == 1);
    CHECK_ERROR_CODE(argmax({}), ErrorCode::bad_request);
  }

  TEST_CASE("verb match compares with the first name part") {
    CHECK(verb_matches("Send", "send_email"));
    CHECK_FALSE(verb_matches("Sending", "send_email"));
    CHECK_FALSE(verb_matches("", "send_email"));
  }

  TEST_CASE("context fills a text parameter") {
    const auto pool = subset({"translate_text"});
    model::Step s;
    s.text = "Translate the summary into French";
    s.verb = "Translate";
    s.data.push_back({"summary", model::CapsuleState::resolved, model::DataSource::upstream(0)});
    s.context.push_back({"into French", model::ContextKind::format});
    s.index = 1;
    const auto b = bind_parameters(pool[0], s);
    CHECK(std::get<std::string>(b.parameters.at("target language")) == "French");
    CHECK(b.missing.empty());
  }

  TEST_CASE("gateway mapper agrees with the direct rule") {
    auto g = agents::make_gateway(true);
    const auto pool = pool20();
    const auto step = check_people_step();
    const auto cands = retrieve(step.text, pool);
    CHECK(Mapper(*g).map(step, cands, pool).binding == map_action(step, cands, pool).binding);
    CHECK_ERROR_CODE(Mapper(*g).map(step, CandidateSet{}, pool), ErrorCode::bad_request);
  }
}
