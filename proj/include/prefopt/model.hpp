#pragma once

// Domain types shared by the solvers, the instantiation layer and the
// session loop. All types are plain values.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace prefopt {

using SpotId = std::string;

inline constexpr double kMinutesPerHour = 60.0;
inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 10.0;
inline constexpr double kDefaultLambdaV = 1.0;
inline constexpr double kDefaultLambdaT = 0.1;

// Generic selection problem: maximize sum of objective values over the
// selected items subject to one threshold per constraint function.
struct ProblemInstance {
  std::vector<std::string> items;
  std::map<std::string, double> objective_values;
  std::vector<std::map<std::string, double>> constraint_values;
  std::vector<double> thresholds;

  std::size_t constraint_count() const { return thresholds.size(); }

  std::vector<std::string> Validate() const;
  double Objective(const std::set<std::string>& selected) const;
  bool IsFeasible(const std::set<std::string>& selected) const;
};

struct Spot {
  SpotId id;
  std::string name;
  std::string address;
  double lat = 0.0;
  double lon = 0.0;
  std::string reason;
  std::set<std::string> sources;

  friend bool operator==(const Spot&, const Spot&) = default;
};

// Dense row-major square matrix of travel minutes.
class TimeMatrix {
 public:
  TimeMatrix() = default;
  explicit TimeMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  TimeMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const { return n_; }
  double operator()(std::size_t from, std::size_t to) const { return data_[from * n_ + to]; }
  double& operator()(std::size_t from, std::size_t to) { return data_[from * n_ + to]; }
  std::span<const double> row_major() const { return data_; }

  // Keeps the listed indices, in the listed order.
  TimeMatrix Select(std::span<const std::size_t> keep) const;

  friend bool operator==(const TimeMatrix&, const TimeMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Orienteering instance. Per-spot arrays are aligned with `spots`.
struct OpInstance {
  std::vector<Spot> spots;
  std::size_t depot_index = 0;
  TimeMatrix travel_time;
  std::vector<double> score;
  std::vector<double> duration;
  double budget_minutes = 0.0;
  double lambda_v = kDefaultLambdaV;
  double lambda_t = kDefaultLambdaT;

  std::size_t size() const { return spots.size(); }
  const SpotId& depot_id() const { return spots.at(depot_index).id; }
  std::optional<std::size_t> IndexOf(const SpotId& id) const;

  friend bool operator==(const OpInstance&, const OpInstance&) = default;
};

enum class SolveStatus {
  kOptimal,     // exact optimum, non-empty tour
  kEmpty,       // stay at the depot; no better tour exists
  kTimeLimit,   // best incumbent when the search was cut short
  kFeasible,    // externally produced route within budget
  kOverBudget,  // externally produced route exceeding budget
};

const char* SolveStatusName(SolveStatus status);
std::optional<SolveStatus> ParseSolveStatus(const std::string& name);

struct Leg {
  SpotId from;
  SpotId to;
  double minutes = 0.0;
  friend bool operator==(const Leg&, const Leg&) = default;
};

struct Stay {
  SpotId spot;
  double minutes = 0.0;
  friend bool operator==(const Stay&, const Stay&) = default;
};

struct Itinerary {
  std::vector<SpotId> route;  // depot ... depot, or empty
  std::vector<Leg> legs;
  std::vector<Stay> stays;
  double total_minutes = 0.0;
  double total_reward = 0.0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kEmpty;

  bool empty() const { return route.empty(); }
  std::size_t poi_count() const { return stays.size(); }

  friend bool operator==(const Itinerary&, const Itinerary&) = default;
};

struct ValueAssignment {
  std::vector<double> score;
  std::vector<double> duration_minutes;
  std::vector<std::string> warnings;

  friend bool operator==(const ValueAssignment&, const ValueAssignment&) = default;
};

struct MustHaveIngredient {
  std::string name;
  double quantity = 0.0;
  std::string unit;
  double kcal = 0.0;
  friend bool operator==(const MustHaveIngredient&, const MustHaveIngredient&) = default;
};

struct OptionalIngredient {
  std::string name;
  double priority = 0.0;
  double kcal = 0.0;
  friend bool operator==(const OptionalIngredient&, const OptionalIngredient&) = default;
};

struct MealInstance {
  std::string recipe_title;
  std::vector<MustHaveIngredient> must_have;
  std::vector<OptionalIngredient> optional;
  double calorie_limit = 0.0;

  std::vector<std::string> Validate() const;
  friend bool operator==(const MealInstance&, const MealInstance&) = default;
};

struct MealPlan {
  double scale_factor = 1.0;
  std::vector<std::string> selected_optionals;  // input order
  std::vector<MustHaveIngredient> scaled_must_have;
  double total_calories = 0.0;
  double total_priority = 0.0;

  friend bool operator==(const MealPlan&, const MealPlan&) = default;
};

struct EvalMetrics {
  double time_deviation_hours = 0.0;
  bool success = false;
  double total_reward = 0.0;
  std::size_t poi_count = 0;
};

// ---- operations -----------------------------------------------------------

// Invariant violations of an OpInstance; empty iff the instance is valid.
std::vector<std::string> ValidateInstance(const OpInstance& instance);

// Drops non-depot spots that cannot contribute: non-positive score, or a
// depot round trip (plus stay) longer than the budget.
OpInstance ReduceInstance(const OpInstance& instance);

double Objective(const OpInstance& instance, double reward, double total_minutes);

// Recomputes legs, stays and totals for an ordered route. Total time is the
// left fold of (travel + stay at destination) over legs in route order.
// Accepts routes without the closing depot (it is appended) and the empty
// route. Throws kUnknownSpotId for ids not in the instance.
Itinerary EvaluateRoute(const OpInstance& instance, std::span<const SpotId> route);

EvalMetrics ComputeMetrics(const Itinerary& itinerary, double budget_minutes);

// Trip instance as the generic arc-selection problem: items are arcs
// "from->to", value is the destination score, the single constraint is
// stay-at-destination plus travel.
ProblemInstance ToProblemInstance(const OpInstance& instance);

// "7 hours 59 minutes", rounding half-up to the minute.
std::string FormatDuration(double minutes);

}  // namespace prefopt
