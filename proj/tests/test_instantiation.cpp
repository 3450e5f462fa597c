#include <deque>

#include "doctest.h"
#include "prefopt/error.hpp"
#include "prefopt/instance_io.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "prefopt/instantiation.hpp"

using namespace prefopt;

namespace {

// Replies from a queue and records every request it sees.
class ScriptedBackend : public LlmBackend {
 public:
  ScriptedBackend(std::string name, std::deque<std::string> replies)
      : name_(std::move(name)), replies_(std::move(replies)) {}
  const std::string& name() const override { return name_; }
  std::string Complete(const LlmRequest& request) override {
    seen.push_back(request);
    if (replies_.empty()) throw Error(ErrorCode::kBackendError, "script exhausted");
    std::string r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    return r;
  }
  std::vector<LlmRequest> seen;

 private:
  std::string name_;
  std::deque<std::string> replies_;
};

std::shared_ptr<const FixtureStore> Fixtures() {
  static auto store = std::make_shared<const FixtureStore>(
      FixtureStore::LoadDirectory(testing::DataDir() / "fixtures"));
  return store;
}

std::string Places(std::initializer_list<std::pair<const char*, const char*>> items) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [n, a] : items) arr.push_back({{"name", n}, {"address", a}, {"reason", "r"}});
  return nlohmann::json{{"places", arr}}.dump();
}

}  // namespace

TEST_SUITE("instantiation") {
  TEST_CASE("paris-art fixture yields eight addressed candidates") {
    MockBackend llm1("llm-1", Fixtures());
    LlmBackend* backends[] = {&llm1};
    const auto set = EnumerateItems("Art museums in Paris, please", TemplateKind::kTripEnumeration, backends);
    REQUIRE(set.items.size() == 8);
    for (const auto& c : set.items) {
      CHECK_FALSE(c.address.empty());
      CHECK_FALSE(c.reason.empty());
      CHECK(c.sources == std::set<std::string>{"llm-1"});
    }
  }

  TEST_CASE("overlapping backends merge with attribution") {
    ScriptedBackend one("one", {Places({{"A", "1 Main St, Town"}, {"B", "2 Main St"}})});
    ScriptedBackend two("two", {Places({{"b", "2  main st, Other Town"}, {"C", "3 Main St"}})});
    LlmBackend* backends[] = {&one, &two};
    const auto set = EnumerateItems("x", TemplateKind::kTripEnumeration, backends);
    REQUIRE(set.items.size() == 3);
    CHECK(set.items[0].name == "A");
    CHECK(set.items[0].sources == std::set<std::string>{"one"});
    CHECK(set.items[1].name == "B");
    CHECK(set.items[1].sources == std::set<std::string>{"one", "two"});
    CHECK(set.items[2].sources == std::set<std::string>{"two"});
    CHECK(set.failures.empty());
  }

  TEST_CASE("a backend failing every attempt is excluded") {
    MockBackend good("llm-1", Fixtures()), bad("llm-bad", Fixtures());
    LlmBackend* backends[] = {&good, &bad};
    const auto set = EnumerateItems("Berlin history", TemplateKind::kTripEnumeration, backends);
    CHECK(set.items.size() == 8);
    REQUIRE(set.failures.size() == 1);
    CHECK(set.failures[0].backend == "llm-bad");
    CHECK(set.failures[0].code == ErrorCode::kParseFailure);
  }

  TEST_CASE("retries re-ask with the rejected reply and then give up") {
    ScriptedBackend bad("bad", {"nonsense"});
    LlmBackend* backends[] = {&bad};
    InstantiationOptions o;
    o.retries = 3;
    try {
      EnumerateItems("x", TemplateKind::kTripEnumeration, backends, o);
      FAIL("expected all backends failed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kAllBackendsFailed);
    }
    REQUIRE(bad.seen.size() == 4);
    CHECK(bad.seen[3].messages.size() == 2 + 3 * 2);
    CHECK(bad.seen[1].messages[2] == ChatMessage{"assistant", "nonsense"});
  }

  TEST_CASE("a later retry can succeed") {
    ScriptedBackend flaky("flaky", {"oops", Places({{"A", "1 St"}})});
    LlmBackend* backends[] = {&flaky};
    CHECK(EnumerateItems("x", TemplateKind::kTripEnumeration, backends).items.size() == 1);
  }

  TEST_CASE("enumeration preconditions") {
    ScriptedBackend b("b", {"{}"});
    LlmBackend* backends[] = {&b};
    CHECK_THROWS_AS(EnumerateItems("   ", TemplateKind::kTripEnumeration, backends), Error);
    CHECK_THROWS_AS(EnumerateItems("x", TemplateKind::kTripEnumeration, {}), Error);
    CHECK_THROWS_AS(EnumerateItems("x", TemplateKind::kTripValueAssignment, backends), Error);
  }

  TEST_CASE("requests carry the template, temperature and attachments") {
    ScriptedBackend b("b", {Places({{"A", "1 St"}})});
    LlmBackend* backends[] = {&b};
    InstantiationOptions o;
    o.attachments.push_back({"image/jpeg", "raw"});
    EnumerateItems("x", TemplateKind::kTripEnumeration, backends, o);
    REQUIRE(b.seen.size() == 1);
    CHECK(b.seen[0].temperature == 0.2);
    CHECK(b.seen[0].schema == "trip_candidates/1");
    CHECK(b.seen[0].attachments.size() == 1);
    CHECK(b.seen[0].messages[0].role == "system");
    CHECK(b.seen[0].messages[1].text == "x");
  }

  TEST_CASE("meal enumeration") {
    MockBackend llm("llm-1", Fixtures());
    LlmBackend* backends[] = {&llm};
    const auto set = EnumerateItems("Something with tofu", TemplateKind::kMealEnumeration, backends);
    REQUIRE(set.items.size() == 5);
    CHECK(set.items[0].name == "Tofu Hamburg Steak");
    CHECK(set.items[0].kcal == 520);
    CHECK_FALSE(set.note.empty());
  }

  TEST_CASE("dedup key and ids") {
    CHECK(DedupKey("  Louvre   Museum ", "Rue de Rivoli, 75001 Paris") == "louvre museum|rue de rivoli");
    CHECK(DedupKey("A", "x\ny") == "a|x");
    CHECK(MakeCandidateId("Brandenburg Gate", {}) == "brandenburg-gate");
    CHECK(MakeCandidateId("Brandenburg Gate", {"brandenburg-gate"}) == "brandenburg-gate-2");
    CHECK(MakeCandidateId("!!!", {}) == "item");
  }

  TEST_CASE("merging keeps ids and positions") {
    CandidateSet base;
    base.items.push_back({"a", "A", "1 St", "", {}, {}, {}, {"one"}});
    CandidateSet more;
    more.items.push_back({"", "A", "1 St", "", {}, {}, {}, {"two"}});
    more.items.push_back({"", "A", "9 St", "", {}, {}, {}, {"two"}});
    MergeCandidates(base, more);
    REQUIRE(base.items.size() == 2);
    CHECK(base.items[0].id == "a");
    CHECK(base.items[0].sources.size() == 2);
    CHECK(base.items[1].id == "a-2");
  }

  TEST_CASE("berlin-history values over seven items") {
    MockBackend llm("llm-1", Fixtures());
    const std::vector<std::string> items{"Berlin Hauptbahnhof", "Brandenburg Gate", "Checkpoint Charlie",
                                         "East Side Gallery",   "Museum Island",    "Berlin Cathedral",
                                         "Berlin Wall Memorial"};
    const auto va = AssignValues("I want to learn about Berlin history.", items, TemplateKind::kTripValueAssignment, llm);
    REQUIRE(va.score.size() == 7);
    REQUIRE(va.duration_minutes.size() == 7);
    CHECK(va.score[0] == 0);
    CHECK(va.duration_minutes[0] == 0);
    for (std::size_t i = 1; i < 7; ++i) {
      CHECK(va.score[i] >= 0);
      CHECK(va.score[i] <= 10);
      CHECK(va.duration_minutes[i] > 0);
    }
    // The explicitly historical sites.
    for (std::size_t i : {1, 2, 4, 6}) CHECK(va.score[i] >= 7);
    CHECK(va.duration_minutes[4] == 180);
  }

  TEST_CASE("depot-only list") {
    ScriptedBackend b("b", {R"({"scores":[4],"durations_hours":[2]})"});
    const std::vector<std::string> items{"Station"};
    const auto va = AssignValues("x", items, TemplateKind::kTripValueAssignment, b);
    CHECK(va.score == std::vector<double>{0});
    CHECK(va.duration_minutes == std::vector<double>{0});
  }

  TEST_CASE("out-of-range scores are clamped with a warning") {
    MockBackend llm("llm-1", Fixtures());
    const std::vector<std::string> items{"S", "A", "B", "C", "D", "E"};
    const auto va = AssignValues("CLAMP", items, TemplateKind::kTripValueAssignment, llm);
    CHECK(va.score[2] == 10);
    CHECK(va.duration_minutes[3] == 0);
    REQUIRE(va.warnings.size() == 2);
    CHECK(va.warnings[0] == "score for 'B' clamped from 11 to 10");
  }

  TEST_CASE("wrong list lengths fail after the retries") {
    MockBackend llm("llm-1", Fixtures());
    const std::vector<std::string> items{"S", "A", "B"};
    try {
      AssignValues("LENGTH-MISMATCH", items, TemplateKind::kTripValueAssignment, llm);
      FAIL("expected length mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLengthMismatch);
      CHECK(std::string(e.what()).find("after 4 attempts") != std::string::npos);
    }
  }

  TEST_CASE("unknown requests fall through to the canned refusal") {
    MockBackend llm("llm-1", Fixtures());
    const std::vector<std::string> items{"S", "A"};
    try {
      AssignValues("nothing matches this", items, TemplateKind::kTripValueAssignment, llm);
      FAIL("expected parse failure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParseFailure);
    }
  }

  TEST_CASE("property: parsed values round trip through JSON") {
    ScriptedBackend b("b", {R"({"scores":[1,2.5,13,-4],"durations_hours":[1,0.25,1.5,2]})"});
    const std::vector<std::string> items{"S", "A", "B", "C"};
    const auto va = AssignValues("x", items, TemplateKind::kTripValueAssignment, b);
    for (double s : va.score) {
      CHECK(s >= 0);
      CHECK(s <= 10);
    }
    const nlohmann::json j = {{"scores", va.score}, {"durations_min", va.duration_minutes}};
    CHECK(j["scores"].get<std::vector<double>>() == va.score);
    CHECK(va.duration_minutes == std::vector<double>{0, 15, 90, 120});
  }

  TEST_CASE("meat-heavy tofu hamburg keeps ground meat as must-have") {
    MockBackend llm("llm-1", Fixtures());
    const auto cm = CategorizeIngredients("Tofu Hamburg Steak", "make it meat-heavy", 700, llm);
    auto has = [](const auto& list, const std::string& n) {
      return std::any_of(list.begin(), list.end(), [&](const auto& i) { return i.name == n; });
    };
    CHECK(has(cm.meal.must_have, "ground meat"));
    CHECK(has(cm.meal.optional, "onion"));
    CHECK(has(cm.meal.optional, "ketchup"));
    CHECK_FALSE(has(cm.meal.must_have, "ketchup"));
    CHECK(cm.meal.calorie_limit == 700);
    CHECK(cm.meal.Validate().empty());
  }

  TEST_CASE("removal requests are enforced after parsing") {
    MockBackend llm("llm-1", Fixtures());
    const auto cm = CategorizeIngredients("Tofu Hamburg Steak", "Please remove the onion and no cheese.", 500, llm);
    for (const auto& o : cm.meal.optional) {
      CHECK(o.name != "onion");
      CHECK(o.name != "cheese");
    }
    CHECK(cm.removed == std::vector<std::string>{"onion", "cheese"});
  }

  TEST_CASE("empty preference gives the canonical split") {
    MockBackend llm("llm-1", Fixtures());
    const auto cm = CategorizeIngredients("Tofu Hamburg Steak", "", 500, llm);
    CHECK(cm.meal.must_have.size() == 2);
    CHECK(cm.meal.optional.size() == 5);
    CHECK(cm.removed.empty());
    CHECK_THROWS_AS(CategorizeIngredients(" ", "", 500, llm), Error);
  }

  TEST_CASE("removal phrase parsing") {
    CHECK(RemovalRequests("Remove onion") == std::vector<std::string>{"onion"});
    CHECK(RemovalRequests("I'd like it without any garlic, thanks") == std::vector<std::string>{"garlic"});
    CHECK(RemovalRequests("more cheese") .empty());
  }

  TEST_CASE("baseline: feasible fixture route") {
    const auto inst = testing::MakeOp({"d", "a", "b", "c"}, {0, 10, 10, 10, 10, 0, 10, 10, 10, 10, 0, 10, 10, 10, 10, 0},
                                      {0, 3, 4, 5}, {0, 10, 10, 10}, 200);
    ScriptedBackend b("b", {R"({"route":[0,1,2,3,0]})"});
    const auto it = LlmOpBaseline(inst, b);
    CHECK(it.route == std::vector<SpotId>{"d", "a", "b", "c", "d"});
    CHECK(it.status == SolveStatus::kFeasible);
    CHECK(ComputeMetrics(it, inst.budget_minutes).success);
  }

  TEST_CASE("baseline: over-budget route is measured, not repaired") {
    const auto inst = testing::MakeOp({"d", "a", "b", "c"}, {0, 10, 10, 10, 10, 0, 10, 10, 10, 10, 0, 10, 10, 10, 10, 0},
                                      {0, 3, 4, 5}, {0, 10, 10, 10}, 50);
    ScriptedBackend b("b", {"Here you go: {\"route\": [0, 3, 1, 2, 0]}"});
    const auto it = LlmOpBaseline(inst, b);
    CHECK(it.status == SolveStatus::kOverBudget);
    const auto m = ComputeMetrics(it, inst.budget_minutes);
    CHECK_FALSE(m.success);
    CHECK(m.time_deviation_hours > 0);
  }

  TEST_CASE("baseline: unknown node ids are not retried") {
    const auto inst = testing::MakeOp({"d", "a"}, {0, 5, 5, 0}, {0, 3}, {0, 10}, 50);
    ScriptedBackend b("b", {R"({"route":[0,7,0]})"});
    try {
      LlmOpBaseline(inst, b);
      FAIL("expected unknown spot");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnknownSpotId);
    }
    CHECK(b.seen.size() == 1);
  }

  TEST_CASE("baseline: depot-only answer is the empty itinerary") {
    const auto inst = testing::MakeOp({"d", "a"}, {0, 5, 5, 0}, {0, 3}, {0, 10}, 50);
    ScriptedBackend b("b", {R"({"route":[0,0]})"});
    CHECK(LlmOpBaseline(inst, b).empty());
  }

  TEST_CASE("baseline: bundled fault fixtures answer the generated instances") {
    MockBackend llm("llm-1", Fixtures());
    const auto inst = LoadOpInstance(testing::DataDir() / "eval" / "gen-000006.json");
    const auto it = LlmOpBaseline(inst, llm);
    CHECK_FALSE(it.empty());
    CHECK(it.status == SolveStatus::kOverBudget);
    const auto req = BaselineRequest(inst);
    CHECK(req.messages[1].text.rfind("Budget: ", 0) == 0);
  }

  TEST_CASE("reply extraction") {
    CHECK(ParseReply("```json\n{\"a\": 1}\n```")["a"] == 1);
    CHECK_THROWS_AS(ParseReply("no braces"), Error);
    CHECK_THROWS_AS(ParseReply("{broken"), Error);
  }
}
