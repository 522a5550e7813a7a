#include "intentflow/agents/external.hpp"
#include "intentflow/extraction/extractor.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace intentflow;
using namespace intentflow::extraction;

namespace {

model::Workflow bare(const std::vector<std::string>& steps) {
  model::Workflow w;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    model::Step s;
    s.index = i;
    s.text = steps[i];
    w.steps.push_back(s);
  }
  return w;
}

std::vector<std::string> riley_steps() {
  return {"Review uploaded images from website URL", "Check the reviewed images if there are people present in them",
          "Download the results of the image review"};
}

}  // namespace

TEST_SUITE("entity-extractor") {
  TEST_CASE("summary prompt") {
    const auto e = rule_based_extract_step(0, "Summarize recorded content into meeting minutes");
    CHECK(e.action_verb == "Summarize");
    CHECK(e.data_labels == std::vector<std::string>{"recorded content"});
    REQUIRE(e.context.size() == 1);
    CHECK(e.context[0].text == "into meeting minutes");
    CHECK(e.context[0].kind == model::ContextKind::format);
  }

  TEST_CASE("bare verb") {
    const auto e = rule_based_extract_step(0, "Download");
    CHECK(e.action_verb == "Download");
    CHECK(e.data_labels.empty());
    CHECK(e.context.empty());
  }

  TEST_CASE("first-step result reference has no data") {
    CHECK(rule_based_extract_step(0, "Download the results").data_labels.empty());
    CHECK(rule_based_extract_step(1, "Download the results").data_labels == std::vector<std::string>{"results"});
  }

  TEST_CASE("book plan entities") {
    const auto e = rule_based_extract({"Search for book title on search engine Google", "Purchase the book on purchase platform"});
    const auto labels = e.all_labels();
    for (const char* want : {"book title", "search engine", "purchase platform"}) {
      CHECK(std::find(labels.begin(), labels.end(), want) != labels.end());
    }
  }

  TEST_CASE("O/X rule stays context") {
    const auto e =
        rule_based_extract_step(0, "Indicate O if there is a person and X if there is not on list website URL");
    CHECK(e.data_labels == std::vector<std::string>{"website URL"});
    bool has_rule = false;
    for (const auto& c : e.context) has_rule = has_rule || c.text.find("O if there is a person") != std::string::npos;
    CHECK(has_rule);
  }

  TEST_CASE("no leading verb is flagged") {
    const auto e = rule_based_extract_step(0, "the quarterly numbers");
    CHECK(e.error == std::string(kNoVerbFound));
  }

  TEST_CASE("Riley materialization") {
    const auto steps = riley_steps();
    const auto w = materialize(rule_based_extract(steps), bare(steps));
    REQUIRE(w.steps[0].data.size() == 1);
    CHECK(w.steps[0].data[0].label == "website URL");
    CHECK(w.steps[0].data[0].state == model::CapsuleState::unresolved);

    REQUIRE(w.steps[1].data.size() == 1);
    CHECK(w.steps[1].data[0].label == "reviewed images");
    CHECK(w.steps[1].data[0].source == model::DataSource::upstream(0));

    REQUIRE(w.steps[2].data.size() == 1);
    CHECK(w.steps[2].data[0].source == model::DataSource::upstream(1));
  }

  TEST_CASE("step without labels gets no capsules") {
    const auto w = materialize(rule_based_extract({"Download"}), bare({"Download"}));
    CHECK(w.steps[0].data.empty());
    CHECK(w.steps[0].verb == "Download");
  }

  TEST_CASE("linked sources survive re-materialization") {
    const auto steps = riley_steps();
    auto w = materialize(rule_based_extract(steps), bare(steps));
    w.steps[0].data[0].state = model::CapsuleState::resolved;
    w.steps[0].data[0].source = model::DataSource::file("image_link.xlsx");
    const auto again = materialize(rule_based_extract(steps), w);
    CHECK(again.steps[0].data[0].source == model::DataSource::file("image_link.xlsx"));
  }

  TEST_CASE("entity count must match the workflow") {
    CHECK_ERROR_CODE(materialize(rule_based_extract({"Download"}), bare({"Download", "Upload"})),
                     ErrorCode::index_mismatch);
  }

  TEST_CASE("through the gateway") {
    auto g = agents::make_gateway(true);
    EntityExtractor x(*g);
    CHECK(x.extract(riley_steps()) == rule_based_extract(riley_steps()));
    CHECK_ERROR_CODE(x.extract({}), ErrorCode::extraction_failed);
  }
}
