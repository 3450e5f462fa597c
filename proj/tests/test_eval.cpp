#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "prefopt/error.hpp"
#include "prefopt/eval.hpp"
#include "prefopt/instance_io.hpp"
#include "prefopt/llm.hpp"
#include "prefopt/op_solver.hpp"

using namespace prefopt;

namespace {

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("generator is deterministic and follows the budget policy") {
    GenOptions o;
    o.seed = 7;
    o.n_spots = 6;
    const OpInstance a = GenerateInstance(o);
    CHECK(DumpJson(OpInstanceToJson(a)) == DumpJson(OpInstanceToJson(GenerateInstance(o))));
    CHECK(ValidateInstance(a).empty());
    CHECK(a.size() == 7);
    double stays = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
      CHECK(a.score[i] >= 1.0);
      CHECK(a.score[i] <= 10.0);
      CHECK(a.duration[i] >= 20.0);
      CHECK(a.duration[i] <= 90.0);
      stays += a.duration[i];
    }
    CHECK(a.budget_minutes == doctest::Approx(0.5 * (stays + NearestNeighbourTourMinutes(a))).epsilon(1e-12));
    o.seed = 8;
    CHECK(DumpJson(OpInstanceToJson(a)) != DumpJson(OpInstanceToJson(GenerateInstance(o))));
    o.n_spots = 0;
    CHECK_THROWS_AS(GenerateInstance(o), Error);
  }

  TEST_CASE("nearest neighbour tour on a line") {
    // depot at 0, spots at 1, 3, 2 on a line; greedy goes 0-1-2-3-0.
    const std::vector<double> pos{0, 1, 3, 2};
    std::vector<double> m;
    for (double a : pos)
      for (double b : pos) m.push_back(std::abs(a - b) * 10);
    const auto inst = testing::MakeOp({"d", "a", "b", "c"}, m, {0, 1, 1, 1}, {0, 1, 1, 1}, 100);
    CHECK(NearestNeighbourTourMinutes(inst) == 60.0);
  }

  TEST_CASE("mean and sample standard deviation") {
    auto [m, sd] = MeanSd({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(m == 5.0);
    CHECK(sd == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(MeanSd({3}).second == 0.0);
  }

  TEST_CASE("empty or missing directory is an input error") {
    testing::TempDir dir("eval-empty");
    try {
      RunEval(dir.path(), {"subset_dp"});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidInput);
    }
    CHECK_THROWS_AS(RunEval(dir.path() / "missing", {"subset_dp"}), Error);
  }

  TEST_CASE("metrics CSV can be recomputed from the itinerary files") {
    testing::TempDir dir("eval-out");
    const auto report = RunEval(testing::DataDir() / "eval", {"subset_dp", "lazy_dfj"});
    WriteEvalOutputs(report, dir.path());
    const auto csv = ParseCsv(ReadFile(dir.path() / "metrics.csv"));
    REQUIRE(csv.size() == 1 + 48);
    CHECK(csv[0] == std::vector<std::string>{"instance", "solver", "budget_min", "total_min", "deviation_h",
                                             "success", "total_reward", "poi_count", "status"});
    for (std::size_t r = 1; r < csv.size(); ++r) {
      const auto& row = csv[r];
      const Itinerary it =
          ItineraryFromJson(ParseJson(ReadFile(dir.path() / "itineraries" / (row[0] + "." + row[1] + ".json"))));
      const double budget = std::stod(row[2]);
      const auto inst = LoadOpInstance(testing::DataDir() / "eval" / (row[0] + ".json"));
      CHECK(budget == inst.budget_minutes);
      // Recompute from the route alone.
      const Itinerary check = EvaluateRoute(inst, it.route);
      CHECK(std::stod(row[3]) == doctest::Approx(check.total_minutes).epsilon(1e-6));
      CHECK(std::stod(row[4]) == doctest::Approx(std::abs(budget - check.total_minutes) / 60.0).epsilon(1e-6));
      CHECK(row[5] == (check.total_minutes <= budget ? "1" : "0"));
      CHECK(std::stod(row[6]) == doctest::Approx(check.total_reward).epsilon(1e-6));
      CHECK(std::stoul(row[7]) == it.route.size() - 2);
    }
    const std::string table = ReadFile(dir.path() / "summary.txt");
    CHECK(table.find("100% (24/24)") != std::string::npos);
    CHECK(table.find(" ± ") != std::string::npos);
  }

  TEST_CASE("exact solvers succeed everywhere and beat the faulty baseline") {
    const auto store =
        std::make_shared<const FixtureStore>(FixtureStore::LoadDirectory(testing::DataDir() / "fixtures"));
    MockBackend baseline("llm-1", store);
    const auto report = RunEval(testing::DataDir() / "eval", {"subset_dp", kBaselineSolver}, &baseline);
    REQUIRE(report.summaries.size() == 2);
    const auto& exact = report.summaries[0];
    const auto& llm = report.summaries[1];
    CHECK(exact.runs == 24);
    CHECK(exact.successes == 24);
    CHECK(llm.successes < 24);
    CHECK(exact.deviation_mean < llm.deviation_mean);
    CHECK(exact.reward_mean > llm.reward_mean);
    CHECK(exact.poi_mean > llm.poi_mean);
  }

  TEST_CASE("baseline without a backend fails each run, not the whole evaluation") {
    const auto report = RunEval(testing::DataDir() / "eval", {kBaselineSolver});
    REQUIRE(report.rows.size() == 24);
    for (const auto& row : report.rows) CHECK(row.error.find("needs a backend") != std::string::npos);
    CHECK(report.summaries.at(0).successes == 0);
  }
}
