#pragma once

// Meal planning: must-have ingredients are scaled to the calorie limit when
// they alone exceed it; otherwise optional ingredients are chosen by a 0/1
// knapsack that maximizes total priority within the remaining calories.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prefopt/model.hpp"

namespace prefopt {

inline constexpr std::size_t kKnapsackBruteForceMax = 20;
inline constexpr std::size_t kKnapsackDpMax = 64;

enum class KnapsackMethod { kDp, kBruteForce };

struct KnapsackConfig {
  double calorie_granularity = 1.0;  // kcal per DP cell, >= 1
  KnapsackMethod method = KnapsackMethod::kDp;
};

// Ties on priority go to fewer items, then to the lexicographically smaller
// sorted name list. Both selectors return names in input order.
//
// The DP rounds each ingredient up to whole cells and the capacity down, so
// its selections always respect the real capacity.
std::vector<std::string> KnapsackDp(std::span<const OptionalIngredient> optionals, double capacity,
                                    double granularity = 1.0);

// Exhaustive over all subsets, using real calories. Throws
// kInstanceTooLarge beyond kKnapsackBruteForceMax items.
std::vector<std::string> KnapsackBruteForce(std::span<const OptionalIngredient> optionals,
                                            double capacity);

// Throws kEmptyInstance when there are no ingredients at all and
// kInvalidInput when the instance violates its invariants.
MealPlan PlanMeal(const MealInstance& instance, const KnapsackConfig& config = {});

}  // namespace prefopt
