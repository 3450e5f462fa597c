#pragma once

// Exact orienteering solvers.
//
// All solvers maximize
//   lambda_v * sum(score) - lambda_t * total_hours
// over depot-rooted tours whose total time (travel + stays) fits the budget.
// The empty tour (stay at the depot, objective 0) is always a candidate.
// Equal objectives (within kObjectiveTolerance) are broken by fewer spots,
// then by the lexicographically smallest visiting order of spot ids.

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefopt/model.hpp"

namespace prefopt {

inline constexpr double kObjectiveTolerance = 1e-9;
inline constexpr std::size_t kBruteForceMaxSpots = 9;
inline constexpr std::size_t kSubsetDpMaxSpots = 20;
inline constexpr std::size_t kLazyDfjMaxSpots = 40;

enum class SolveMethod { kSubsetDp, kLazyDfj, kBruteForce };

const char* SolveMethodName(SolveMethod method);
std::optional<SolveMethod> ParseSolveMethod(const std::string& name);

struct SolverConfig {
  SolveMethod method = SolveMethod::kSubsetDp;
  // Overrides the method's built-in cap on non-depot spots (never raises it).
  std::optional<std::size_t> max_spots;
  // lazy_dfj only; the best incumbent is returned with status kTimeLimit.
  std::optional<std::chrono::milliseconds> time_limit;
};

// Maximum number of non-depot spots a method accepts.
std::size_t MethodCap(const SolverConfig& config);

struct Arc {
  SpotId from;
  SpotId to;
  friend bool operator==(const Arc&, const Arc&) = default;
};

// Set of spots (sorted ids, depot excluded) that must not carry a closed cycle:
//   sum_{i,j in S} x_ij <= |S| - 1
struct SubtourCut {
  std::vector<SpotId> spots;
  friend bool operator==(const SubtourCut&, const SubtourCut&) = default;
};

struct LazyDfjStats {
  std::size_t nodes = 0;
  std::size_t leaves_checked = 0;
  std::size_t cuts_added = 0;
  std::vector<SubtourCut> cuts;
};

struct LazyDfjOptions {
  std::optional<std::chrono::milliseconds> time_limit;
};

// Dispatches on config.method. Throws kPrecondition for invalid instances
// and kInstanceTooLarge when the method's cap is exceeded.
Itinerary Solve(const OpInstance& instance, const SolverConfig& config = {});

// Held-Karp table over spot subsets.
Itinerary SolveSubsetDp(const OpInstance& instance);

// Branch-and-bound over successor arcs with degree and budget constraints;
// subtour elimination cuts are generated lazily whenever a candidate
// integer solution contains a cycle that avoids the depot.
Itinerary SolveLazyDfj(const OpInstance& instance, const LazyDfjOptions& options = {},
                       LazyDfjStats* stats = nullptr);

// Enumerates every subset in every order. At most kBruteForceMaxSpots spots.
Itinerary BruteForceOracle(const OpInstance& instance);

// Connected components of the selected-arc graph that avoid the depot.
// Components are reported with sorted ids, ordered by their smallest id.
std::vector<SubtourCut> FindSubtours(std::span<const Arc> arcs, const SpotId& depot);

std::vector<Arc> RouteArcs(const Itinerary& itinerary);

// True when candidate (objective, visiting order of non-depot spots) is
// strictly preferred to the incumbent under the shared tie-break rule.
bool IsPreferred(double objective, std::span<const SpotId> visit_order,
                 double incumbent_objective, std::span<const SpotId> incumbent_order);

// Non-depot spots of a route in visiting order.
std::vector<SpotId> VisitOrder(const Itinerary& itinerary);

}  // namespace prefopt
