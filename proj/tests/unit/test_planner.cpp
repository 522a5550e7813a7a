#include "intentflow/agents/external.hpp"
#include "intentflow/planning/planner.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace intentflow;
using namespace intentflow::planning;

namespace {

std::vector<std::string> normalized(const std::vector<std::string>& steps) {
  std::vector<std::string> out;
  for (const auto& s : steps) out.push_back(testing::normalize_step(s));
  return out;
}

Plan plan_of(const Planner& p, const std::string& prompt) {
  const query::RawQuery q{prompt, std::nullopt};
  return p.plan(query::rule_based_process(q, query::select_option(q)));
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("Riley plan has the three golden steps") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    const auto golden = testing::fixture_json("goldens/riley.json");
    const Plan plan = plan_of(p, golden["prompt"]);
    CHECK(normalized(plan.steps) == normalized(golden["steps"].get<std::vector<std::string>>()));
    CHECK(plan.iteration == 0);
    CHECK_FALSE(plan.final);
  }

  TEST_CASE("book request gives a search step and a purchase step") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    const Plan plan = plan_of(p, "Please search for a specific book on Google and then buy it");
    REQUIRE(plan.steps.size() == 2);
    CHECK(plan.steps[0].rfind("Search for book title", 0) == 0);
    CHECK(plan.steps[1].rfind("Purchase the book", 0) == 0);
  }

  TEST_CASE("single clause gives a one-step plan equal to the clause") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    CHECK(plan_of(p, "Download the results").steps == std::vector<std::string>{"Download the results"});
  }

  TEST_CASE("replacing the download step") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    const auto golden = testing::fixture_json("goldens/riley.json");
    const Plan plan = plan_of(p, golden["prompt"]);
    const auto r = p.refine(plan, Feedback::modify("replace download with send via email"));
    REQUIRE(r.plan.steps.size() == 3);
    CHECK(r.plan.steps[0] == plan.steps[0]);
    CHECK(r.plan.steps[1] == plan.steps[1]);
    CHECK(r.plan.steps[2] == "Send the results via email");
    CHECK(r.plan.iteration == 1);
    CHECK(r.record.iteration == 0);
    CHECK(r.record.plan_before == plan.steps);
    CHECK(r.record.plan_after == r.plan.steps);
  }

  TEST_CASE("approval keeps the steps and finalizes") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    const Plan plan = plan_of(p, "Download the results");
    const auto r = p.refine(plan, Feedback::approve());
    CHECK(r.plan.steps == plan.steps);
    CHECK(r.plan.final);
    CHECK(r.record.approved);
    CHECK_ERROR_CODE(p.refine(r.plan, Feedback::modify("add send via email")), ErrorCode::plan_final);
  }

  TEST_CASE("the eleventh modify is refused") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    Plan plan = plan_of(p, "Download the results");
    std::vector<model::RefinementRecord> history;
    for (int i = 0; i < 10; ++i) {
      auto r = p.refine(plan, Feedback::modify(i % 2 ? "remove step 2" : "add send via email"));
      plan = r.plan;
      history.push_back(r.record);
    }
    CHECK(plan.iteration == 10);
    CHECK_ERROR_CODE(p.refine(plan, Feedback::modify("add send via email")), ErrorCode::iteration_limit_exceeded);
    CHECK(p.replay(history).steps == plan.steps);
  }

  TEST_CASE("feedback parsing") {
    const std::vector<std::string> steps{"Review images", "Check images", "Download the results"};
    auto e = parse_feedback("remove download", steps);
    REQUIRE(e);
    CHECK(e->kind == EditKind::remove);
    CHECK(e->from == 2);
    e = parse_feedback("move step 1 to 2", steps);
    REQUIRE(e);
    CHECK(e->kind == EditKind::reorder);
    CHECK(e->from == 0);
    CHECK(e->to == 1);
    e = parse_feedback("add translate the results into French", steps);
    REQUIRE(e);
    CHECK(e->kind == EditKind::append);
    CHECK_FALSE(parse_feedback("this looks weird", steps));
  }

  TEST_CASE("uninterpretable feedback") {
    auto g = agents::make_gateway(true);
    Planner p(*g);
    CHECK_ERROR_CODE(p.refine(plan_of(p, "Download the results"), Feedback::modify("hmm, not sure")),
                     ErrorCode::uninterpretable_feedback);
  }
}
