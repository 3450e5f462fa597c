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

const SolveMethod kAll[] = {SolveMethod::kSubsetDp, SolveMethod::kLazyDfj, SolveMethod::kBruteForce};

Itinerary Run(const OpInstance& inst, SolveMethod m) {
  SolverConfig c;
  c.method = m;
  return Solve(inst, c);
}

OpInstance OneSpot(double budget) { return MakeOp({"d", "s"}, {0, 30, 30, 0}, {0, 5}, {0, 60}, budget); }

// Depot with a near pair {a,b} and a far, high-scoring pair {c,d}.
// The pair {c,d} is cheap to cycle but cannot be reached within budget.
OpInstance TwoClusters() {
  const double F = 500;
  return MakeOp({"depot", "a", "b", "c", "d"},
                {0, 5, 6, F, F,
                 5, 0, 2, F, F,
                 6, 2, 0, F, F,
                 F, F, F, 0, 1,
                 F, F, F, 1, 0},
                {0, 3, 3, 10, 10}, {0, 10, 10, 10, 10}, 60);
}

}  // namespace

TEST_SUITE("op_solver") {
  TEST_CASE("single feasible spot") {
    for (auto m : kAll) {
      const auto it = Run(OneSpot(150), m);
      CHECK(it.route == std::vector<SpotId>{"d", "s", "d"});
      CHECK(it.total_minutes == 120);
      CHECK(it.objective == doctest::Approx(4.8).epsilon(1e-15));
      CHECK(it.status == SolveStatus::kOptimal);
    }
  }

  TEST_CASE("tight budget gives the empty itinerary") {
    for (auto m : kAll) {
      const auto it = Run(OneSpot(100), m);
      CHECK(it.empty());
      CHECK(it.objective == 0);
      CHECK(it.status == SolveStatus::kEmpty);
    }
  }

  TEST_CASE("no spots besides the depot") {
    const auto inst = MakeOp({"d"}, {0}, {0}, {0}, 10);
    for (auto m : kAll) CHECK(Run(inst, m).empty());
  }

  TEST_CASE("two spots, all subsets and orders") {
    const auto inst = MakeOp({"d", "a", "b"}, {0, 10, 12, 11, 0, 3, 9, 4, 0}, {0, 4, 6}, {0, 20, 20}, 100);
    const auto o = oracle::SolveOp(inst);
    for (auto m : kAll) {
      const auto it = Run(inst, m);
      CHECK(VisitOrder(it) == o.order);
      CHECK(it.objective == doctest::Approx(o.objective).epsilon(1e-12));
    }
  }

  TEST_CASE("equal rewards: the shorter tour wins") {
    // A round trip 80 min, B 100 min, both 100 min; budget 90 admits only A.
    const auto inst = MakeOp({"d", "A", "B"}, {0, 40, 50, 40, 0, 10, 50, 10, 0}, {0, 5, 5}, {0, 0, 0}, 90);
    for (auto m : kAll) CHECK(Run(inst, m).route == std::vector<SpotId>{"d", "A", "d"});
  }

  TEST_CASE("exact ties go to fewer spots, then the smaller id order") {
    // Symmetric square: both directions around the same cycle tie exactly.
    auto inst = MakeOp({"d", "x", "y"}, {0, 10, 10, 10, 0, 10, 10, 10, 0}, {0, 2, 2}, {0, 0, 0}, 100);
    inst.lambda_t = 0;
    for (auto m : kAll) CHECK(VisitOrder(Run(inst, m)) == std::vector<SpotId>{"x", "y"});
    // Zero-gain spot with no time penalty: visiting it ties with staying home.
    auto flat = MakeOp({"d", "z"}, {0, 10, 10, 0}, {0, 0}, {0, 0}, 100);
    flat.lambda_t = 0;
    for (auto m : kAll) CHECK(Run(flat, m).empty());
  }

  TEST_CASE("oracle equivalence on random asymmetric instances") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto inst = oracle::RandomOp(seed, 6);
      const auto o = oracle::SolveOp(inst);
      for (auto m : kAll) {
        const auto it = Run(inst, m);
        CHECK(std::abs(it.objective - o.objective) <= 1e-9);
        CHECK(VisitOrder(it) == o.order);
        CHECK(it.total_minutes <= inst.budget_minutes);
      }
    }
  }

  TEST_CASE("brute force beats any hand-built feasible tour") {
    GenOptions g;
    g.seed = 11;
    g.n_spots = 7;
    const auto inst = GenerateInstance(g);
    const auto best = BruteForceOracle(inst);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
      std::vector<SpotId> route;
      for (std::size_t i = 1; i < inst.size(); ++i) {
        if (rng() % 2) route.push_back(inst.spots[i].id);
      }
      std::shuffle(route.begin(), route.end(), rng);
      const auto it = EvaluateRoute(inst, route);
      if (it.total_minutes <= inst.budget_minutes) CHECK(best.objective >= it.objective - 1e-12);
    }
  }

  TEST_CASE("method caps") {
    const auto big = oracle::RandomOp(1, 10);
    SolverConfig c;
    c.method = SolveMethod::kBruteForce;
    CHECK_THROWS_AS(Solve(big, c), Error);
    c.method = SolveMethod::kSubsetDp;
    c.max_spots = 5;
    CHECK_THROWS_AS(Solve(big, c), Error);
    c.max_spots = 50;  // never raises the built-in cap
    CHECK(MethodCap(c) == kSubsetDpMaxSpots);
    try {
      Solve(oracle::RandomOp(1, 21), SolverConfig{});
      FAIL("expected instance_too_large");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInstanceTooLarge);
    }
  }

  TEST_CASE("invalid instances are rejected") {
    auto inst = OneSpot(150);
    inst.score[1] = -1;
    CHECK_THROWS_AS(Solve(inst), Error);
  }

  TEST_CASE("find_subtours") {
    std::vector<Arc> tour{{"d", "a"}, {"a", "d"}};
    CHECK(FindSubtours(tour, "d").empty());
    std::vector<Arc> two{{"d", "a"}, {"a", "d"}, {"b", "c"}, {"c", "b"}};
    CHECK(FindSubtours(two, "d") == std::vector<SubtourCut>{{{"b", "c"}}});
    std::vector<Arc> three{{"d", "a"}, {"a", "d"}, {"e", "f"}, {"f", "g"}, {"g", "e"}, {"c", "b"}, {"b", "c"}};
    const auto cuts = FindSubtours(three, "d");
    REQUIRE(cuts.size() == 2);
    CHECK(cuts[0].spots == std::vector<SpotId>{"b", "c"});
    CHECK(cuts[1].spots == std::vector<SpotId>{"e", "f", "g"});
  }

  TEST_CASE("lazy DFJ cuts the far cluster") {
    const auto inst = TwoClusters();
    LazyDfjStats stats;
    const auto it = SolveLazyDfj(inst, {}, &stats);
    CHECK(stats.cuts_added >= 1);
    CHECK(std::find(stats.cuts.begin(), stats.cuts.end(), SubtourCut{{"c", "d"}}) != stats.cuts.end());
    const auto arcs = RouteArcs(it);
    CHECK(FindSubtours(arcs, "depot").empty());
    CHECK(VisitOrder(it) == oracle::SolveOp(inst).order);
  }

  TEST_CASE("lazy DFJ matches the DP on a compact instance") {
    const auto inst = MakeOp({"d", "a", "b", "c"}, {0, 5, 5, 5, 5, 0, 4, 4, 5, 4, 0, 4, 5, 4, 4, 0},
                             {0, 4, 5, 6}, {0, 10, 10, 10}, 200);
    LazyDfjStats stats;
    const auto it = SolveLazyDfj(inst, {}, &stats);
    CHECK(stats.cuts_added == stats.cuts.size());
    CHECK(it.objective == doctest::Approx(SolveSubsetDp(inst).objective).epsilon(1e-12));
  }

  TEST_CASE("lazy DFJ time limit returns the incumbent with a flag") {
    const auto inst = oracle::RandomOp(4, 30);
    LazyDfjOptions o;
    o.time_limit = std::chrono::milliseconds(0);
    const auto it = SolveLazyDfj(inst, o);
    CHECK(it.status == SolveStatus::kTimeLimit);
    CHECK(it.total_minutes <= inst.budget_minutes);
  }

  TEST_CASE("property: monotone in budget") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto inst = oracle::RandomOp(seed, 6);
      double prev = -1;
      for (double f : {0.2, 0.5, 0.8, 1.0, 1.5, 3.0}) {
        auto scaled = inst;
        scaled.budget_minutes = inst.budget_minutes * f;
        const double obj = Solve(scaled).objective;
        CHECK(obj >= prev - 1e-12);
        prev = obj;
      }
    }
  }

  TEST_CASE("property: deterministic repeated solves") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto inst = oracle::RandomOp(seed, 7);
      for (auto m : kAll) CHECK(Run(inst, m) == Run(inst, m));
    }
  }

  TEST_CASE("property: scaling scores and lambda_t together keeps the argmax") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto inst = oracle::RandomOp(seed, 6);
      auto scaled = inst;
      const double k = 0.5;  // power of two: scaled sums stay exact
      for (auto& s : scaled.score) s *= k;
      scaled.lambda_t *= k;
      const auto a = Solve(inst);
      const auto b = Solve(scaled);
      CHECK(a.route == b.route);
      CHECK(b.objective == doctest::Approx(k * a.objective).epsilon(1e-12));
    }
  }

  TEST_CASE("property: returned tours are subtour-free and feasible") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto inst = oracle::RandomOp(seed, 8);
      for (auto m : {SolveMethod::kSubsetDp, SolveMethod::kLazyDfj}) {
        const auto it = Run(inst, m);
        const auto arcs = RouteArcs(it);
        CHECK(FindSubtours(arcs, inst.depot_id()).empty());
        CHECK(it.total_minutes <= inst.budget_minutes);
      }
    }
  }

  TEST_CASE("lazy DFJ handles instances beyond the subset DP cap") {
    GenOptions g;
    g.seed = 2;
    g.n_spots = 24;
    g.budget_policy = 0.25;
    const auto inst = GenerateInstance(g);
    SolverConfig c;
    c.method = SolveMethod::kLazyDfj;
    const auto it = Solve(inst, c);
    CHECK(it.total_minutes <= inst.budget_minutes);
    CHECK(it.status == SolveStatus::kOptimal);
  }

  TEST_CASE("method names") {
    CHECK(ParseSolveMethod("lazy_dfj") == SolveMethod::kLazyDfj);
    CHECK_FALSE(ParseSolveMethod("gurobi").has_value());
    CHECK(std::string(SolveMethodName(SolveMethod::kSubsetDp)) == "subset_dp");
  }
}
