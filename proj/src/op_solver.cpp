#include "prefopt/op_solver.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <utility>

#include "prefopt/error.hpp"

namespace prefopt {

const char* SolveMethodName(SolveMethod method) {
  switch (method) {
    case SolveMethod::kSubsetDp: return "subset_dp";
    case SolveMethod::kLazyDfj: return "lazy_dfj";
    case SolveMethod::kBruteForce: return "brute_force";
  }
  return "unknown";
}

std::optional<SolveMethod> ParseSolveMethod(const std::string& name) {
  for (auto m : {SolveMethod::kSubsetDp, SolveMethod::kLazyDfj, SolveMethod::kBruteForce}) {
    if (name == SolveMethodName(m)) return m;
  }
  return std::nullopt;
}

std::size_t MethodCap(const SolverConfig& config) {
  std::size_t cap = 0;
  switch (config.method) {
    case SolveMethod::kSubsetDp: cap = kSubsetDpMaxSpots; break;
    case SolveMethod::kLazyDfj: cap = kLazyDfjMaxSpots; break;
    case SolveMethod::kBruteForce: cap = kBruteForceMaxSpots; break;
  }
  if (config.max_spots) cap = std::min(cap, *config.max_spots);
  return cap;
}

bool IsPreferred(double objective, std::span<const SpotId> order, double incumbent_objective,
                 std::span<const SpotId> incumbent_order) {
  if (objective > incumbent_objective + kObjectiveTolerance) return true;
  if (objective < incumbent_objective - kObjectiveTolerance) return false;
  if (order.size() != incumbent_order.size()) return order.size() < incumbent_order.size();
  return std::lexicographical_compare(order.begin(), order.end(), incumbent_order.begin(),
                                      incumbent_order.end());
}

std::vector<SpotId> VisitOrder(const Itinerary& it) {
  std::vector<SpotId> out;
  out.reserve(it.stays.size());
  for (const auto& s : it.stays) out.push_back(s.spot);
  return out;
}

std::vector<Arc> RouteArcs(const Itinerary& it) {
  std::vector<Arc> arcs;
  for (std::size_t k = 0; k + 1 < it.route.size(); ++k) arcs.push_back({it.route[k], it.route[k + 1]});
  return arcs;
}

std::vector<SubtourCut> FindSubtours(std::span<const Arc> arcs, const SpotId& depot) {
  std::map<SpotId, SpotId> parent;
  auto find = [&](SpotId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& a : arcs) {
    parent.try_emplace(a.from, a.from);
    parent.try_emplace(a.to, a.to);
  }
  for (const auto& a : arcs) {
    SpotId ra = find(a.from), rb = find(a.to);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  const bool has_depot = parent.contains(depot);
  const SpotId depot_root = has_depot ? find(depot) : SpotId();

  std::map<SpotId, SubtourCut> components;  // root -> members
  for (const auto& [node, _] : parent) {
    SpotId root = find(node);
    if (has_depot && root == depot_root) continue;
    components[root].spots.push_back(node);  // map iteration keeps ids sorted
  }
  std::vector<SubtourCut> out;
  for (auto& [root, cut] : components) out.push_back(std::move(cut));
  std::sort(out.begin(), out.end(),
            [](const SubtourCut& a, const SubtourCut& b) { return a.spots.front() < b.spots.front(); });
  return out;
}

namespace {

Itinerary Finalize(const OpInstance& inst, const std::vector<SpotId>& order) {
  if (order.empty()) {
    Itinerary empty;
    empty.status = SolveStatus::kEmpty;
    return empty;
  }
  std::vector<SpotId> route;
  route.reserve(order.size() + 2);
  route.push_back(inst.depot_id());
  route.insert(route.end(), order.begin(), order.end());
  route.push_back(inst.depot_id());
  Itinerary it = EvaluateRoute(inst, route);
  it.status = SolveStatus::kOptimal;
  return it;
}

std::vector<std::size_t> NonDepot(const OpInstance& inst) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (i != inst.depot_index) out.push_back(i);
  }
  return out;
}

// ---- brute force ----------------------------------------------------------

class Enumerator {
 public:
  explicit Enumerator(const OpInstance& inst) : inst_(inst), others_(NonDepot(inst)) {
    used_.assign(inst.size(), false);
  }

  std::vector<SpotId> Run() {
    Extend(inst_.depot_index, 0.0, 0.0);
    return best_order_;
  }

 private:
  void Extend(std::size_t cur, double elapsed, double reward) {
    const std::size_t d = inst_.depot_index;
    if (!order_.empty()) {
      const double total = elapsed + (inst_.travel_time(cur, d) + inst_.duration[d]);
      if (total <= inst_.budget_minutes) {
        const double obj = Objective(inst_, reward, total);
        if (IsPreferred(obj, order_, best_objective_, best_order_)) {
          best_objective_ = obj;
          best_order_ = order_;
        }
      }
    }
    for (std::size_t j : others_) {
      if (used_[j]) continue;
      const double t = elapsed + (inst_.travel_time(cur, j) + inst_.duration[j]);
      // Every entry is non-negative, so a prefix over budget stays over budget.
      if (t > inst_.budget_minutes) continue;
      used_[j] = true;
      order_.push_back(inst_.spots[j].id);
      Extend(j, t, reward + inst_.score[j]);
      order_.pop_back();
      used_[j] = false;
    }
  }

  const OpInstance& inst_;
  std::vector<std::size_t> others_;
  std::vector<bool> used_;
  std::vector<SpotId> order_;
  double best_objective_ = 0.0;  // the empty tour
  std::vector<SpotId> best_order_;
};

// ---- Held-Karp ------------------------------------------------------------

class SubsetDp {
 public:
  explicit SubsetDp(const OpInstance& inst) : inst_(inst), others_(NonDepot(inst)) {
    m_ = others_.size();
    half_ = m_ == 0 ? 0 : (std::size_t{1} << (m_ - 1));
    // Ranks by id so lexicographic reconstruction can scan in id order.
    by_id_.resize(m_);
    std::iota(by_id_.begin(), by_id_.end(), std::size_t{0});
    std::sort(by_id_.begin(), by_id_.end(), [&](std::size_t a, std::size_t b) {
      return inst_.spots[others_[a]].id < inst_.spots[others_[b]].id;
    });
  }

  std::vector<SpotId> Run() {
    if (m_ == 0) return {};
    BuildTable();
    const std::size_t full = std::size_t{1} << m_;
    const double slack = 1e-6 * (1.0 + inst_.budget_minutes);

    std::vector<double> tour_time(full, std::numeric_limits<double>::infinity());
    std::vector<double> reward(full, 0.0);
    double best_estimate = 0.0;
    for (std::size_t s = 1; s < full; ++s) {
      const std::size_t low = std::countr_zero(s);
      reward[s] = reward[s & (s - 1)] + inst_.score[others_[low]];
      tour_time[s] = TourTime(s);
      if (tour_time[s] <= inst_.budget_minutes) {
        best_estimate = std::max(best_estimate, Objective(inst_, reward[s], tour_time[s]));
      }
    }

    const double screen = 1e-6 * (1.0 + std::abs(best_estimate));
    auto [objective, order] = Scan(tour_time, reward, best_estimate - screen, slack);
    if (objective < best_estimate - screen) {
      // The screened band held no tour that is feasible once re-evaluated
      // in route order; scan everything.
      std::tie(objective, order) =
          Scan(tour_time, reward, -std::numeric_limits<double>::infinity(), slack);
    }
    return order;
  }

 private:
  std::pair<double, std::vector<SpotId>> Scan(const std::vector<double>& tour_time,
                                              const std::vector<double>& reward, double floor,
                                              double slack) const {
    const std::size_t full = std::size_t{1} << m_;
    double best_objective = 0.0;
    std::vector<SpotId> best_order;
    for (std::size_t s = 1; s < full; ++s) {
      if (tour_time[s] > inst_.budget_minutes + slack) continue;
      if (Objective(inst_, reward[s], tour_time[s]) < floor) continue;
      std::vector<SpotId> order = Reconstruct(s, tour_time[s]);
      std::vector<SpotId> route;
      route.push_back(inst_.depot_id());
      route.insert(route.end(), order.begin(), order.end());
      route.push_back(inst_.depot_id());
      const Itinerary it = EvaluateRoute(inst_, route);
      if (it.total_minutes > inst_.budget_minutes) continue;
      if (IsPreferred(it.objective, order, best_objective, best_order)) {
        best_objective = it.objective;
        best_order = std::move(order);
      }
    }
    return {best_objective, std::move(best_order)};
  }

  double Leg(std::size_t from, std::size_t to) const {
    return inst_.travel_time(from, to) + inst_.duration[to];
  }

  std::size_t Index(std::size_t rest, std::size_t v) const {
    const std::size_t low = rest & ((std::size_t{1} << v) - 1);
    const std::size_t high = (rest >> (v + 1)) << v;
    return v * half_ + (low | high);
  }

  // after_[v, R]: least time from leaving spot v (its stay done) through every
  // spot of R, back to the depot.
  void BuildTable() {
    const std::size_t d = inst_.depot_index;
    const std::size_t full = std::size_t{1} << m_;
    after_.assign(m_ * half_, std::numeric_limits<double>::infinity());
    for (std::size_t rest = 0; rest < full; ++rest) {
      for (std::size_t v = 0; v < m_; ++v) {
        if (rest & (std::size_t{1} << v)) continue;
        double best;
        if (rest == 0) {
          best = Leg(others_[v], d);
        } else {
          best = std::numeric_limits<double>::infinity();
          for (std::size_t r = rest; r; r &= r - 1) {
            const std::size_t w = std::countr_zero(r);
            const double t = Leg(others_[v], others_[w]) + after_[Index(rest & ~(std::size_t{1} << w), w)];
            best = std::min(best, t);
          }
        }
        after_[Index(rest, v)] = best;
      }
    }
  }

  double TourTime(std::size_t set) const {
    const std::size_t d = inst_.depot_index;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = set; r; r &= r - 1) {
      const std::size_t v = std::countr_zero(r);
      best = std::min(best, Leg(d, others_[v]) + after_[Index(set & ~(std::size_t{1} << v), v)]);
    }
    return best;
  }

  // Lexicographically smallest visiting order among (near-)minimal tours of set.
  std::vector<SpotId> Reconstruct(std::size_t set, double target) const {
    std::vector<SpotId> order;
    std::size_t cur = inst_.depot_index;
    std::size_t rest = set;
    while (rest) {
      const double tol = 1e-9 * (1.0 + std::abs(target));
      std::size_t pick = m_;
      double pick_value = 0.0;
      for (std::size_t w : by_id_) {
        if (!(rest & (std::size_t{1} << w))) continue;
        const double value = Leg(cur, others_[w]) + after_[Index(rest & ~(std::size_t{1} << w), w)];
        if (value <= target + tol) {
          pick = w;
          pick_value = after_[Index(rest & ~(std::size_t{1} << w), w)];
          break;
        }
      }
      if (pick == m_) {
        // Tolerance too tight for this set; fall back to the exact argmin.
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t w : by_id_) {
          if (!(rest & (std::size_t{1} << w))) continue;
          const double value = Leg(cur, others_[w]) + after_[Index(rest & ~(std::size_t{1} << w), w)];
          if (value < best) {
            best = value;
            pick = w;
            pick_value = after_[Index(rest & ~(std::size_t{1} << w), w)];
          }
        }
      }
      order.push_back(inst_.spots[others_[pick]].id);
      rest &= ~(std::size_t{1} << pick);
      cur = others_[pick];
      target = pick_value;
    }
    return order;
  }

  const OpInstance& inst_;
  std::vector<std::size_t> others_;
  std::vector<std::size_t> by_id_;
  std::size_t m_ = 0;
  std::size_t half_ = 0;
  std::vector<double> after_;
};

void RequireSolvable(const OpInstance& inst, std::size_t cap, const char* method) {
  auto violations = ValidateInstance(inst);
  if (!violations.empty()) {
    std::string msg = "invalid instance:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(ErrorCode::kPrecondition, msg);
  }
  const std::size_t spots = inst.size() - 1;
  if (spots > cap) {
    throw Error(ErrorCode::kInstanceTooLarge,
                std::string(method) + " accepts at most " + std::to_string(cap) +
                    " non-depot spots, instance has " + std::to_string(spots));
  }
}

}  // namespace

Itinerary BruteForceOracle(const OpInstance& inst) {
  RequireSolvable(inst, kBruteForceMaxSpots, "brute_force");
  return Finalize(inst, Enumerator(inst).Run());
}

Itinerary SolveSubsetDp(const OpInstance& inst) {
  RequireSolvable(inst, kSubsetDpMaxSpots, "subset_dp");
  return Finalize(inst, SubsetDp(inst).Run());
}

Itinerary Solve(const OpInstance& inst, const SolverConfig& config) {
  RequireSolvable(inst, MethodCap(config), SolveMethodName(config.method));
  switch (config.method) {
    case SolveMethod::kSubsetDp: return SolveSubsetDp(inst);
    case SolveMethod::kBruteForce: return BruteForceOracle(inst);
    case SolveMethod::kLazyDfj: return SolveLazyDfj(inst, LazyDfjOptions{config.time_limit});
  }
  throw Error(ErrorCode::kInvalidInput, "unknown solve method");
}

}  // namespace prefopt
