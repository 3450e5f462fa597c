#pragma once

// Synthetic instances and the evaluation harness: runs solvers over a
// directory of `lappi-op/1` files and reports time deviation, reward, stop
// count and success rate per solver.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "prefopt/llm.hpp"
#include "prefopt/model.hpp"
#include "prefopt/providers.hpp"

namespace prefopt {

struct GenOptions {
  std::uint64_t seed = 1;
  std::size_t n_spots = 8;     // non-depot spots
  double budget_policy = 0.5;  // budget = policy * (stays + nearest-neighbour tour)
  double radius_km = 5.0;
  LatLon center{52.5200, 13.4050};
  double speed_kmh = kDefaultWalkingSpeedKmh;
};

// Deterministic per seed. Scores U[1,10], stays U[20,90] minutes, spots
// uniform in a disc around the depot, walking-time matrix.
OpInstance GenerateInstance(const GenOptions& options);

// Travel time of the greedy nearest-neighbour tour from the depot through
// every spot and back. Ties go to the lower index.
double NearestNeighbourTourMinutes(const OpInstance& instance);

inline constexpr const char* kBaselineSolver = "llm_op_baseline";

struct EvalRow {
  std::string instance;  // file stem
  std::string solver;
  double budget_minutes = 0.0;
  Itinerary itinerary;
  EvalMetrics metrics;
  std::string error;  // non-empty when the solver failed on this instance
};

struct SolverSummary {
  std::string solver;
  std::size_t runs = 0;       // instances attempted
  std::size_t solved = 0;     // runs that produced an itinerary
  std::size_t successes = 0;  // itineraries within budget
  double deviation_mean = 0, deviation_sd = 0;
  double reward_mean = 0, reward_sd = 0;
  double poi_mean = 0, poi_sd = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by instance, then solver order
  std::vector<SolverSummary> summaries;
  std::vector<std::pair<std::string, std::string>> skipped;  // (file, reason)
};

// `solvers` holds method names or kBaselineSolver; the baseline needs
// `baseline_backend`. Throws kInvalidInput when the directory has no
// readable instance.
EvalReport RunEval(const std::filesystem::path& instances_dir, const std::vector<std::string>& solvers,
                   LlmBackend* baseline_backend = nullptr, std::size_t threads = 0);

SolverSummary Summarize(const std::string& solver, const std::vector<EvalRow>& rows);

// instance,solver,budget_min,total_min,deviation_h,success,total_reward,poi_count,status
std::string EvalCsv(const EvalReport& report);
// One row per solver: "mean ± sd" cells and "100% (24/24)" success.
std::string EvalTable(const EvalReport& report);

// Writes metrics.csv, summary.txt and itineraries/<instance>.<solver>.json.
void WriteEvalOutputs(const EvalReport& report, const std::filesystem::path& out_dir);

// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> MeanSd(const std::vector<double>& values);

}  // namespace prefopt
