#include "prefopt/knapsack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "prefopt/error.hpp"

namespace prefopt {
namespace {

using Mask = std::uint64_t;

// Total order used by both selectors. Priority sums are always taken in
// input order so equal sets produce bit-identical sums.
class SelectionOrder {
 public:
  explicit SelectionOrder(std::span<const OptionalIngredient> items) : items_(items) {
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return items[a].name < items[b].name; });
    name_rank_.resize(items.size());
    for (std::size_t r = 0; r < idx.size(); ++r) name_rank_[idx[r]] = r;
  }

  double Priority(Mask m) const {
    double total = 0.0;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (m & (Mask{1} << i)) total += items_[i].priority;
    }
    return total;
  }

  bool Better(Mask a, Mask b) const {
    if (a == b) return false;
    const double pa = Priority(a), pb = Priority(b);
    if (pa != pb) return pa > pb;
    const int ca = std::popcount(a), cb = std::popcount(b);
    if (ca != cb) return ca < cb;
    // Same size: the sorted name lists first differ at the smallest name in
    // the symmetric difference; the set holding it sorts first.
    const Mask diff = a ^ b;
    std::size_t best = items_.size(), best_rank = items_.size();
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if ((diff & (Mask{1} << i)) && name_rank_[i] < best_rank) {
        best_rank = name_rank_[i];
        best = i;
      }
    }
    return (a & (Mask{1} << best)) != 0;
  }

  std::vector<std::string> Names(Mask m) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (m & (Mask{1} << i)) out.push_back(items_[i].name);
    }
    return out;
  }

 private:
  std::span<const OptionalIngredient> items_;
  std::vector<std::size_t> name_rank_;
};

}  // namespace

std::vector<std::string> KnapsackBruteForce(std::span<const OptionalIngredient> items,
                                            double capacity) {
  if (items.size() > kKnapsackBruteForceMax) {
    throw Error(ErrorCode::kInstanceTooLarge,
                "knapsack brute force accepts at most " + std::to_string(kKnapsackBruteForceMax) +
                    " optional ingredients");
  }
  SelectionOrder order(items);
  Mask best = 0;
  const Mask end = Mask{1} << items.size();
  for (Mask m = 1; m < end; ++m) {
    double kcal = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (m & (Mask{1} << i)) kcal += items[i].kcal;
    }
    if (kcal > capacity) continue;
    if (order.Better(m, best)) best = m;
  }
  return order.Names(best);
}

std::vector<std::string> KnapsackDp(std::span<const OptionalIngredient> items, double capacity,
                                    double granularity) {
  if (!(granularity >= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "calorie granularity must be >= 1");
  }
  if (items.size() > kKnapsackDpMax) {
    throw Error(ErrorCode::kInstanceTooLarge,
                "knapsack accepts at most " + std::to_string(kKnapsackDpMax) +
                    " optional ingredients");
  }
  if (capacity < 0.0) return {};
  const std::size_t cells = static_cast<std::size_t>(std::floor(capacity / granularity));
  std::vector<std::size_t> weight(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    weight[i] = static_cast<std::size_t>(std::ceil(items[i].kcal / granularity));
  }

  SelectionOrder order(items);
  // best[c]: preferred selection among the items seen so far using <= c cells.
  std::vector<Mask> best(cells + 1, 0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (weight[i] > cells) continue;
    for (std::size_t c = cells + 1; c-- > weight[i];) {
      const Mask with = best[c - weight[i]] | (Mask{1} << i);
      if (order.Better(with, best[c])) best[c] = with;
    }
  }
  return order.Names(best[cells]);
}

MealPlan PlanMeal(const MealInstance& meal, const KnapsackConfig& config) {
  if (meal.must_have.empty() && meal.optional.empty()) {
    throw Error(ErrorCode::kEmptyInstance, "meal instance has no ingredients");
  }
  if (auto violations = meal.Validate(); !violations.empty()) {
    throw Error(ErrorCode::kInvalidInput, "invalid meal instance: " + violations.front());
  }

  double must_kcal = 0.0;
  for (const auto& m : meal.must_have) must_kcal += m.kcal;

  MealPlan plan;
  if (must_kcal > meal.calorie_limit) {
    double scale = meal.calorie_limit / must_kcal;
    while (scale * must_kcal > meal.calorie_limit) scale = std::nextafter(scale, 0.0);
    plan.scale_factor = scale;
    for (auto m : meal.must_have) {
      m.quantity *= scale;
      m.kcal *= scale;
      plan.scaled_must_have.push_back(std::move(m));
    }
    plan.total_calories = scale * must_kcal;
    return plan;
  }

  plan.scale_factor = 1.0;
  plan.scaled_must_have = meal.must_have;
  const double capacity = meal.calorie_limit - must_kcal;
  plan.selected_optionals = config.method == KnapsackMethod::kDp
                                ? KnapsackDp(meal.optional, capacity, config.calorie_granularity)
                                : KnapsackBruteForce(meal.optional, capacity);
  plan.total_calories = must_kcal;
  for (const auto& o : meal.optional) {
    if (std::find(plan.selected_optionals.begin(), plan.selected_optionals.end(), o.name) !=
        plan.selected_optionals.end()) {
      plan.total_calories += o.kcal;
      plan.total_priority += o.priority;
    }
  }
  return plan;
}

}  // namespace prefopt
