#include "intentflow/model/serialize.hpp"
#include "intentflow/model/validate.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

using namespace intentflow;
using namespace intentflow::model;

namespace {

Workflow chain(std::size_t n) {
  Workflow w;
  w.id = "wf_test";
  w.title = "chain";
  w.created_at = testing::ts("2026-03-24T09:00:00Z");
  w.updated_at = w.created_at;
  for (std::size_t i = 0; i < n; ++i) {
    Step s;
    s.index = i;
    s.text = "Echo step " + std::to_string(i);
    s.verb = "Echo";
    w.steps.push_back(std::move(s));
  }
  return w;
}

DataCapsule upstream_capsule(std::size_t from) {
  return {"previous output", CapsuleState::resolved, DataSource::upstream(from)};
}

}  // namespace

TEST_SUITE("workflow-model") {
  TEST_CASE("resolved three-step chain is valid") {
    Workflow w = chain(3);
    for (std::size_t i = 1; i < 3; ++i) w.steps[i].data.push_back(upstream_capsule(i - 1));
    w.steps[0].data.push_back({"input", CapsuleState::resolved, DataSource::file("in.csv")});
    for (auto& s : w.steps) s.action = ActionBinding{"echo_text", "Echo", 1.0, {}};
    w.status = WorkflowStatus::ready;
    CHECK(validate(w).ok());
  }

  TEST_CASE("capsule reading a later step is a forward reference") {
    Workflow w = chain(3);
    w.steps[1].data.push_back(upstream_capsule(2));
    const auto r = validate(w);
    CHECK(r.has(rules::kForwardDataReference));
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].step_index == 1);
  }

  TEST_CASE("duplicate index is reported") {
    Workflow w = chain(3);
    w.steps[2].index = 1;
    CHECK(validate(w).has(rules::kNonContiguousIndices));
  }

  TEST_CASE("index assignments agree with a brute-force rule evaluator") {
    // Every assignment of indices 0..n to n <= 4 steps, each step optionally
    // reading one other position's output.
    std::size_t checked = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
      std::vector<std::size_t> idx(n, 0);
      std::function<void(std::size_t)> rec = [&](std::size_t pos) {
        if (pos == n) {
          Workflow w = chain(n);
          for (std::size_t i = 0; i < n; ++i) w.steps[i].index = idx[i];
          std::set<std::size_t> seen(idx.begin(), idx.end());
          bool expect_ok = seen.size() == n && *seen.rbegin() == n - 1 && std::is_sorted(idx.begin(), idx.end());
          CHECK(validate(w).has(rules::kNonContiguousIndices) == !expect_ok);

          // References from position p to position q.
          for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = 0; q < n; ++q) {
              Workflow r = chain(n);
              r.steps[p].data.push_back(upstream_capsule(q));
              CHECK(validate(r).has(rules::kForwardDataReference) == (q >= p));
              ++checked;
            }
          }
          return;
        }
        for (std::size_t v = 0; v <= n; ++v) {
          idx[pos] = v;
          rec(pos + 1);
        }
      };
      rec(0);
    }
    CHECK(checked > 0);
  }

  TEST_CASE("capsule state must match presence of a source") {
    Workflow w = chain(1);
    w.steps[0].data.push_back({"x", CapsuleState::resolved, std::nullopt});
    w.steps[0].data.push_back({"y", CapsuleState::unresolved, DataSource::file("a")});
    const auto r = validate(w);
    CHECK(std::count_if(r.violations.begin(), r.violations.end(),
                        [](const Violation& v) { return v.rule == rules::kCapsuleStateMismatch; }) == 2);
  }

  TEST_CASE("ready workflow needs every step resolved") {
    Workflow w = chain(1);
    w.status = WorkflowStatus::ready;
    CHECK(validate(w).has(rules::kUnresolvedInReady));
    w.steps[0].action = ActionBinding{"echo_text", "Echo", 1.0, {}};
    CHECK(validate(w).ok());
  }

  TEST_CASE("refinement history checks") {
    Workflow w = chain(1);
    w.refinement_history.push_back({0, "approve", {"a"}, {"a"}, true});
    w.refinement_history.push_back({2, "remove a", {"a"}, {}, false});
    const auto r = validate(w);
    CHECK(r.has(rules::kRefinementIndices));
    CHECK(r.has(rules::kApprovalNotFinal));
  }

  TEST_CASE("minimal workflow round-trips byte-identical") {
    Workflow w = chain(1);
    const std::string bytes = serialize(w);
    const auto back = deserialize(bytes);
    CHECK(back.warnings.empty());
    CHECK(back.workflow == w);
    CHECK(serialize(back.workflow) == bytes);
  }

  TEST_CASE("full workflow round-trips") {
    Workflow w = chain(2);
    w.steps[0].data.push_back({"website URL", CapsuleState::resolved, DataSource::url("https://x.example/a")});
    w.steps[0].context.push_back({"into meeting minutes", ContextKind::format});
    w.steps[1].data.push_back(upstream_capsule(0));
    ActionBinding b{"translate_text", "Translate", 0.5, {}};
    b.parameters["text"] = DataSource::upstream(0);
    b.parameters["target language"] = std::string("French");
    w.steps[1].action = b;
    w.steps[1].output = StepOutput{1, OutputKind::text, "runs/r/steps/1/x.txt", testing::ts("2026-03-24T10:00:00Z")};
    w.schedule = Schedule{"weekly Wed@09:00", "Europe/Berlin", testing::ts("2026-03-25T08:00:00Z")};
    w.refinement_history.push_back({0, "approve", {"a", "b"}, {"a", "b"}, true});
    const auto back = deserialize(serialize(w));
    CHECK(back.workflow == w);
  }

  TEST_CASE("unknown fields are ignored and reported") {
    const std::string input = exec::read_file(testing::fixture("workflows/unknown_field.json"));
    const auto d = deserialize(input);
    CHECK(serialize(d.workflow) == exec::read_file(testing::fixture("workflows/unknown_field.canonical.json")));
    const auto expected = testing::fixture_json("workflows/unknown_field.warnings.json").get<std::vector<std::string>>();
    CHECK(std::multiset<std::string>(d.warnings.begin(), d.warnings.end()) ==
          std::multiset<std::string>(expected.begin(), expected.end()));
  }

  TEST_CASE("version 99 is rejected") {
    auto doc = nlohmann::json::parse(serialize(chain(1)));
    doc["version"] = "99";
    CHECK_ERROR_CODE(deserialize(doc.dump()), ErrorCode::version_mismatch);
  }

  TEST_CASE("malformed documents name the offending path") {
    CHECK_ERROR_CODE(deserialize("{not json"), ErrorCode::parse_error);
    auto doc = nlohmann::json::parse(serialize(chain(1)));
    doc["steps"][0]["index"] = "zero";
    try {
      deserialize(doc.dump());
      FAIL("expected parse_error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse_error);
      CHECK(e.details()["path"] == "$.steps[0].index");
    }
  }
}
