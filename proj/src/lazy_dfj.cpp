// Branch-and-bound over successor arcs for the orienteering model
//
//   max  lambda_v * sum x_st v(t) - lambda_t * sum x_st (stay(t) + travel(s,t))
//   s.t. sum x_st (stay(t) + travel(s,t)) <= budget
//        depot: exactly one arc out, one arc in
//        other spots: in-degree == out-degree <= 1
//        sum_{i,j in S} x_ij <= |S| - 1   for every S without the depot (lazy)
//
// Degree constraints hold by construction: each node gets at most one
// successor and one predecessor, and chains are only closed into cycles.
// The search first grows the depot cycle, then lets each remaining node
// either stay unvisited or open a further cycle. Candidate leaves are checked
// for cycles avoiding the depot; every such cycle becomes a cut in the pool
// and the leaf is rejected. Partial assignments that already fill a pooled
// cut are pruned.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <set>

#include "prefopt/error.hpp"
#include "prefopt/op_solver.hpp"

namespace prefopt {
namespace {

constexpr int kUndecided = -1;
constexpr int kExcluded = -2;

struct PooledCut {
  std::uint64_t mask = 0;
  int size = 0;
  int inside = 0;  // assigned arcs with both ends in the set
};

class LazyDfjSearch {
 public:
  LazyDfjSearch(const OpInstance& inst, const LazyDfjOptions& options, LazyDfjStats* stats)
      : inst_(inst), n_(inst.size()), depot_(inst.depot_index), stats_(stats) {
    if (options.time_limit) {
      deadline_ = std::chrono::steady_clock::now() + *options.time_limit;
    }
    succ_.assign(n_, kUndecided);
    pred_.assign(n_, kUndecided);
    visited_.assign(n_, false);
    visited_[depot_] = true;

    min_in_.assign(n_, std::numeric_limits<double>::infinity());
    for (std::size_t w = 0; w < n_; ++w) {
      for (std::size_t u = 0; u < n_; ++u) {
        if (u != w) min_in_[w] = std::min(min_in_[w], inst_.travel_time(u, w) + inst_.duration[w]);
      }
      if (n_ == 1) min_in_[w] = 0.0;
    }
    // Branching and bounding order: best score per unit of unavoidable time.
    for (std::size_t v = 0; v < n_; ++v) {
      if (v != depot_) by_ratio_.push_back(v);
    }
    std::stable_sort(by_ratio_.begin(), by_ratio_.end(), [&](std::size_t a, std::size_t b) {
      return inst_.score[a] * min_in_[b] > inst_.score[b] * min_in_[a];
    });
  }

  Itinerary Run() {
    if (n_ > 1) {
      chain_end_ = depot_;
      Expand();
    }
    Itinerary out;
    if (!best_order_.empty()) {
      std::vector<SpotId> route{inst_.depot_id()};
      route.insert(route.end(), best_order_.begin(), best_order_.end());
      route.push_back(inst_.depot_id());
      out = EvaluateRoute(inst_, route);
      out.status = SolveStatus::kOptimal;
    } else {
      out.status = SolveStatus::kEmpty;
    }
    if (aborted_) out.status = SolveStatus::kTimeLimit;
    if (stats_) {
      stats_->nodes = nodes_;
      stats_->leaves_checked = leaves_;
      stats_->cuts_added = cuts_.size();
      stats_->cuts.clear();
      for (const auto& c : cuts_) {
        SubtourCut cut;
        for (std::size_t v = 0; v < n_; ++v) {
          if (c.mask & (std::uint64_t{1} << v)) cut.spots.push_back(inst_.spots[v].id);
        }
        std::sort(cut.spots.begin(), cut.spots.end());
        stats_->cuts.push_back(std::move(cut));
      }
    }
    return out;
  }

 private:
  bool TimeUp() {
    if (aborted_) return true;
    if (deadline_ && (nodes_ & 1023) == 0 && std::chrono::steady_clock::now() > *deadline_) {
      aborted_ = true;
    }
    return aborted_;
  }

  bool Open() const { return chain_end_ != kNone; }
  std::size_t CloseTarget() const { return depot_closed_ ? cycle_start_ : depot_; }

  double Bound() const {
    double mandatory = Open() ? min_in_[CloseTarget()] : 0.0;
    double capacity = inst_.budget_minutes - committed_ - mandatory;
    if (capacity < 0.0) return -std::numeric_limits<double>::infinity();
    double extra = 0.0;
    for (std::size_t w : by_ratio_) {
      if (visited_[w] || succ_[w] == kExcluded) continue;
      if (min_in_[w] <= capacity) {
        capacity -= min_in_[w];
        extra += inst_.score[w];
      } else {
        extra += inst_.score[w] * (capacity / min_in_[w]);
        break;
      }
    }
    return Objective(inst_, reward_ + extra, committed_ + mandatory);
  }

  bool Prunable(double bound) const { return bound < best_objective_ - kObjectiveTolerance; }

  // Returns false when the arc fills a pooled cut or breaks the budget.
  bool AssignArc(std::size_t from, std::size_t to) {
    succ_[from] = static_cast<int>(to);
    pred_[to] = static_cast<int>(from);
    committed_ += inst_.travel_time(from, to) + inst_.duration[to];
    bool ok = committed_ <= inst_.budget_minutes;
    const std::uint64_t pair = (std::uint64_t{1} << from) | (std::uint64_t{1} << to);
    for (auto& c : cuts_) {
      if ((c.mask & pair) == pair && ++c.inside >= c.size) ok = false;
    }
    return ok;
  }

  void UnassignArc(std::size_t from, std::size_t to, double saved_committed) {
    const std::uint64_t pair = (std::uint64_t{1} << from) | (std::uint64_t{1} << to);
    for (auto& c : cuts_) {
      if ((c.mask & pair) == pair) --c.inside;
    }
    committed_ = saved_committed;
    succ_[from] = kUndecided;
    pred_[to] = kUndecided;
  }

  void Expand() {
    ++nodes_;
    if (TimeUp()) return;
    if (Prunable(Bound())) return;

    if (Open()) {
      ExtendChain();
      return;
    }
    std::size_t start = kNone;
    for (std::size_t v = 0; v < n_; ++v) {
      if (v != depot_ && !visited_[v] && succ_[v] == kUndecided) {
        start = v;
        break;
      }
    }
    if (start == kNone) {
      CheckLeaf();
      return;
    }
    // Open a further cycle at `start`...
    const std::size_t outer_start = cycle_start_;
    visited_[start] = true;
    reward_ += inst_.score[start];
    cycle_start_ = start;
    chain_end_ = start;
    Expand();
    chain_end_ = kNone;
    cycle_start_ = outer_start;
    reward_ -= inst_.score[start];
    visited_[start] = false;
    if (aborted_) return;
    // ...or leave it out.
    succ_[start] = kExcluded;
    Expand();
    succ_[start] = kUndecided;
  }

  void ExtendChain() {
    const std::size_t cur = chain_end_;
    const std::size_t target = CloseTarget();
    for (std::size_t w : by_ratio_) {
      if (visited_[w] || succ_[w] == kExcluded) continue;
      const double saved = committed_;
      if (AssignArc(cur, w)) {
        visited_[w] = true;
        reward_ += inst_.score[w];
        chain_end_ = w;
        Expand();
        chain_end_ = cur;
        reward_ -= inst_.score[w];
        visited_[w] = false;
      }
      UnassignArc(cur, w, saved);
      if (aborted_) return;
    }
    // Close the chain; both the depot cycle and later cycles need one spot
    // besides the closing node.
    if (cur == target) return;
    const double saved = committed_;
    if (AssignArc(cur, target)) {
      const bool closing_depot = !depot_closed_;
      if (closing_depot) depot_closed_ = true;
      chain_end_ = kNone;
      Expand();
      chain_end_ = cur;
      if (closing_depot) depot_closed_ = false;
    }
    UnassignArc(cur, target, saved);
  }

  void CheckLeaf() {
    const double relaxed = Objective(inst_, reward_, committed_);
    if (Prunable(relaxed)) return;
    ++leaves_;

    std::vector<Arc> arcs;
    for (std::size_t v = 0; v < n_; ++v) {
      if (succ_[v] >= 0) arcs.push_back({inst_.spots[v].id, inst_.spots[succ_[v]].id});
    }
    const auto subtours = FindSubtours(arcs, inst_.depot_id());
    if (!subtours.empty()) {
      for (const auto& s : subtours) AddCut(s);
      return;
    }

    std::vector<SpotId> order;
    for (int v = succ_[depot_]; v >= 0 && static_cast<std::size_t>(v) != depot_; v = succ_[v]) {
      order.push_back(inst_.spots[v].id);
    }
    // Re-evaluate in route order so the incumbent matches EvaluateRoute bit for bit.
    std::vector<SpotId> route{inst_.depot_id()};
    route.insert(route.end(), order.begin(), order.end());
    route.push_back(inst_.depot_id());
    const Itinerary it = EvaluateRoute(inst_, route);
    if (it.total_minutes > inst_.budget_minutes) return;
    if (IsPreferred(it.objective, order, best_objective_, best_order_)) {
      best_objective_ = it.objective;
      best_order_ = std::move(order);
    }
  }

  void AddCut(const SubtourCut& cut) {
    PooledCut c;
    for (const auto& id : cut.spots) c.mask |= std::uint64_t{1} << *inst_.IndexOf(id);
    c.size = static_cast<int>(cut.spots.size());
    if (!seen_cuts_.insert(c.mask).second) return;
    for (std::size_t v = 0; v < n_; ++v) {
      if (succ_[v] < 0) continue;
      const std::uint64_t pair = (std::uint64_t{1} << v) | (std::uint64_t{1} << succ_[v]);
      if ((c.mask & pair) == pair) ++c.inside;
    }
    cuts_.push_back(c);
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  const OpInstance& inst_;
  const std::size_t n_;
  const std::size_t depot_;
  LazyDfjStats* stats_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;

  std::vector<int> succ_;
  std::vector<int> pred_;
  std::vector<bool> visited_;
  std::vector<double> min_in_;
  std::vector<std::size_t> by_ratio_;

  std::size_t chain_end_ = kNone;
  std::size_t cycle_start_ = kNone;
  bool depot_closed_ = false;
  double committed_ = 0.0;
  double reward_ = 0.0;

  std::vector<PooledCut> cuts_;
  std::set<std::uint64_t> seen_cuts_;

  double best_objective_ = 0.0;  // the empty tour
  std::vector<SpotId> best_order_;

  std::size_t nodes_ = 0;
  std::size_t leaves_ = 0;
  bool aborted_ = false;
};

}  // namespace

Itinerary SolveLazyDfj(const OpInstance& inst, const LazyDfjOptions& options, LazyDfjStats* stats) {
  auto violations = ValidateInstance(inst);
  if (!violations.empty()) {
    throw Error(ErrorCode::kPrecondition, "invalid instance: " + violations.front());
  }
  if (inst.size() - 1 > kLazyDfjMaxSpots) {
    throw Error(ErrorCode::kInstanceTooLarge,
                "lazy_dfj accepts at most " + std::to_string(kLazyDfjMaxSpots) + " non-depot spots");
  }
  return LazyDfjSearch(inst, options, stats).Run();
}

}  // namespace prefopt
