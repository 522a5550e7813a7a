#include "intentflow/agents/external.hpp"
#include "intentflow/query/query_processor.hpp"
#include "intentflow/text/lexicon.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace intentflow;
using namespace intentflow::query;

TEST_SUITE("query-processor") {
  TEST_CASE("Riley prompt decomposes") {
    const auto golden = testing::fixture_json("goldens/riley.json");
    const RawQuery q{golden["prompt"], std::nullopt};
    CHECK(select_option(q) == Option::decomposition);
    const auto r = rule_based_process(q, Option::decomposition);
    CHECK(r.option_applied == Option::decomposition);
    std::vector<std::string> norm;
    for (const auto& c : r.clauses) norm.push_back(testing::normalize_step(c));
    CHECK(norm == golden["clauses"].get<std::vector<std::string>>());
  }

  TEST_CASE("a bare verb is expanded with a keyword slot") {
    const RawQuery q{"Translate.", std::nullopt};
    CHECK(select_option(q) == Option::expansion);
    const auto r = rule_based_process(q, Option::expansion);
    CHECK(r.text == "Translate. (target language?)");
    CHECK(r.clauses.size() == 1);
  }

  TEST_CASE("reformulation trims") {
    const auto r = rule_based_process({"  Summarize recorded content into meeting minutes  ", std::nullopt},
                                      Option::reformulation);
    CHECK(r.text == "Summarize recorded content into meeting minutes");
    CHECK(r.clauses == std::vector<std::string>{r.text});
  }

  TEST_CASE("reformulation is idempotent") {
    for (const char* p : {"please   download the report", "Kindly translate the memo into French!",
                          "I want to summarize the notes"}) {
      const auto once = rule_based_process({p, std::nullopt}, Option::reformulation);
      const auto twice = rule_based_process({once.text, std::nullopt}, Option::reformulation);
      CHECK(once == twice);
    }
  }

  TEST_CASE("50-prompt corpus matches the rule table") {
    const auto corpus = testing::fixture_json("corpus/prompts50.json");
    REQUIRE(corpus.size() == 50);
    for (const auto& e : corpus) {
      const std::string prompt = e["prompt"];
      CAPTURE(prompt);
      CHECK(std::string(to_string(select_option({prompt, std::nullopt}))) == e["option"].get<std::string>());
      CHECK(text::content_tokens(prompt).size() == e["content_tokens"].get<std::size_t>());
    }
  }

  TEST_CASE("decomposition keeps every content token") {
    const auto corpus = testing::fixture_json("corpus/prompts50.json");
    for (const auto& e : corpus) {
      if (e["option"] != "decomposition") continue;
      const std::string prompt = e["prompt"];
      CAPTURE(prompt);
      const auto r = rule_based_process({prompt, std::nullopt}, Option::decomposition);
      CHECK(r.clauses.size() == e["clauses"].get<std::size_t>());
      std::vector<std::string> have;
      for (const auto& c : r.clauses) {
        for (auto& t : text::content_tokens(c)) have.push_back(t);
      }
      for (const auto& t : text::content_tokens(prompt)) {
        CHECK_MESSAGE(std::find(have.begin(), have.end(), t) != have.end(), t);
      }
    }
  }

  TEST_CASE("filler-only queries are empty") {
    CHECK_ERROR_CODE(rule_based_process({"please", std::nullopt}, Option::reformulation), ErrorCode::empty_query);
    CHECK_ERROR_CODE(select_option({"   ", std::nullopt}), ErrorCode::bad_request);
  }

  TEST_CASE("through the gateway") {
    auto g = agents::make_gateway(true);
    QueryProcessor qp(*g);
    const auto r = qp.process({"Translate.", std::nullopt});
    CHECK(r.option_applied == Option::expansion);
    const auto forced = qp.process({"Translate.", std::nullopt}, Option::reformulation);
    CHECK(forced.option_applied == Option::reformulation);
  }
}
