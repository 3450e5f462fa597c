#include <random>

#include "doctest.h"
#include "prefopt/error.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "prefopt/eval.hpp"
#include "prefopt/op_solver.hpp"

using namespace prefopt;
using testing::MakeOp;

namespace {

OpInstance ThreeSpot() {
  return MakeOp({"d", "a", "b"}, {0, 10, 20, 10, 0, 15, 20, 15, 0}, {0, 5, 7}, {0, 30, 45}, 200);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("well-formed instance validates cleanly") { CHECK(ValidateInstance(ThreeSpot()).empty()); }

  TEST_CASE("score above range is one violation") {
    auto inst = ThreeSpot();
    inst.score[1] = 12;
    const auto v = ValidateInstance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rfind("score out of [0,10]", 0) == 0);
  }

  TEST_CASE("negative travel time is reported") {
    auto inst = ThreeSpot();
    inst.travel_time(1, 2) = -1;
    const auto v = ValidateInstance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "negative travel time");
  }

  TEST_CASE("depot must carry zero score and duration") {
    auto inst = ThreeSpot();
    inst.score[0] = 1;
    inst.duration[0] = 5;
    const auto v = ValidateInstance(inst);
    CHECK(v.size() == 2);
  }

  TEST_CASE("structural violations") {
    auto inst = ThreeSpot();
    inst.travel_time(0, 0) = 3;
    inst.spots[2].id = "a";
    inst.spots[1].lat = 91;
    inst.budget_minutes = 0;
    const auto v = ValidateInstance(inst);
    CHECK(v.size() == 4);
  }

  TEST_CASE("reduce drops non-positive scores") {
    auto inst = ThreeSpot();
    inst.score[1] = 0;
    const auto r = ReduceInstance(inst);
    REQUIRE(r.size() == 2);
    CHECK(r.spots[1].id == "b");
    CHECK(r.travel_time(0, 1) == 20);
    CHECK(r.duration[1] == 45);
  }

  TEST_CASE("reduce drops a singleton one minute over budget") {
    auto inst = ThreeSpot();
    // b: 20 + 45 + 20 = 85
    inst.budget_minutes = 84;
    const auto r = ReduceInstance(inst);
    REQUIRE(r.size() == 2);
    CHECK(r.spots[1].id == "a");
    inst.budget_minutes = 85;
    CHECK(ReduceInstance(inst).size() == 3);
  }

  TEST_CASE("reduce keeps feasible positive spots unchanged") {
    const auto inst = ThreeSpot();
    CHECK(ReduceInstance(inst) == inst);
  }

  TEST_CASE("reduce re-indexes a non-zero depot") {
    auto inst = MakeOp({"a", "d", "b"}, {0, 10, 5, 10, 0, 10, 5, 10, 0}, {0, 0, 4}, {0, 0, 10}, 100);
    inst.depot_index = 1;
    const auto r = ReduceInstance(inst);
    REQUIRE(r.size() == 2);
    CHECK(r.depot_id() == "d");
    CHECK(r.depot_index == 0);
  }

  TEST_CASE("property: reduce is idempotent and keeps the optimum") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      GenOptions o;
      o.seed = seed;
      o.n_spots = 4 + seed % 5;
      o.budget_policy = 0.3 + 0.05 * static_cast<double>(seed % 6);
      auto inst = GenerateInstance(o);
      inst.score[1 + seed % o.n_spots] = 0;
      const auto once = ReduceInstance(inst);
      CHECK(ReduceInstance(once) == once);
      CHECK(oracle::SolveOp(once).objective == oracle::SolveOp(inst).objective);
    }
  }

  TEST_CASE("evaluate route recomputes totals bit-identically") {
    const auto inst = ThreeSpot();
    const std::vector<SpotId> route{"d", "b", "a", "d"};
    const auto it = EvaluateRoute(inst, route);
    CHECK(it.total_minutes == ((20.0 + 45.0) + (15.0 + 30.0)) + (10.0 + 0.0));
    CHECK(it.total_reward == 12);
    CHECK(it.legs.size() == 3);
    CHECK(it.stays.size() == 2);
    CHECK(it.status == SolveStatus::kFeasible);
    const std::vector<SpotId> open{"b", "a"};
    CHECK(EvaluateRoute(inst, open) == it);
    CHECK(EvaluateRoute(inst, std::vector<SpotId>{}).empty());
    CHECK_THROWS_AS(EvaluateRoute(inst, std::vector<SpotId>{"d", "zz", "d"}), Error);
  }

  TEST_CASE("property: solver totals recompute from the route") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto inst = oracle::RandomOp(seed, 6);
      const auto it = Solve(inst);
      const auto again = EvaluateRoute(inst, it.route);
      CHECK(again.total_minutes == it.total_minutes);
      CHECK(again.objective == it.objective);
    }
  }

  TEST_CASE("objective uses hours for the time penalty") {
    const auto inst = ThreeSpot();
    CHECK(Objective(inst, 5, 120) == doctest::Approx(4.8).epsilon(1e-15));
  }

  TEST_CASE("metrics") {
    const auto inst = ThreeSpot();
    const auto it = EvaluateRoute(inst, std::vector<SpotId>{"d", "a", "d"});
    const auto m = ComputeMetrics(it, 200);
    CHECK(m.success);
    CHECK(m.poi_count == 1);
    CHECK(m.time_deviation_hours == doctest::Approx((200.0 - 50.0) / 60.0));
    const auto over = ComputeMetrics(it, 40);
    CHECK_FALSE(over.success);
    CHECK(over.time_deviation_hours == doctest::Approx(10.0 / 60.0));
  }

  TEST_CASE("duration formatting rounds half up at presentation") {
    CHECK(FormatDuration(479) == "7 hours 59 minutes");
    CHECK(FormatDuration(478.5) == "7 hours 59 minutes");
    CHECK(FormatDuration(478.49) == "7 hours 58 minutes");
    CHECK(FormatDuration(61) == "1 hour 1 minute");
    CHECK(FormatDuration(0) == "0 hours 0 minutes");
  }

  TEST_CASE("generic instance view of a trip") {
    const auto p = ToProblemInstance(ThreeSpot());
    CHECK(p.Validate().empty());
    CHECK(p.items.size() == 6);
    CHECK(p.constraint_count() == 1);
    CHECK(p.objective_values.at("a->b") == 7);
    CHECK(p.constraint_values[0].at("a->b") == 15 + 45);
    CHECK(p.Objective({"d->a", "a->d"}) == 5);
    CHECK(p.IsFeasible({"d->a", "a->d"}));
    CHECK_FALSE(p.IsFeasible({"d->a", "a->b", "b->d", "d->b", "b->a", "a->d"}));
  }

  TEST_CASE("generic instance validation") {
    ProblemInstance p;
    p.items = {"x"};
    p.objective_values["x"] = 1;
    p.thresholds = {1};
    CHECK_FALSE(p.Validate().empty());
    p.constraint_values.push_back({{"x", 1}});
    CHECK(p.Validate().empty());
  }
}
