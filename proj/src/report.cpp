#include "prefopt/report.hpp"

#include <algorithm>
#include <cstdio>

namespace prefopt {
namespace {

std::string Name(const OpInstance& inst, const SpotId& id) {
  const auto i = inst.IndexOf(id);
  if (!i || inst.spots[*i].name.empty()) return id;
  return inst.spots[*i].name + " [" + id + "]";
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string FormatItinerary(const OpInstance& inst, const Itinerary& it) {
  std::string out;
  if (it.empty()) {
    out += "No tour fits the budget of " + FormatDuration(inst.budget_minutes) +
           "; stay at " + Name(inst, inst.depot_id()) + ".\n";
    return out;
  }
  out += " 1. " + Name(inst, it.route.front()) + " (start)\n";
  for (std::size_t k = 0; k < it.legs.size(); ++k) {
    const Leg& leg = it.legs[k];
    out += "      travel " + FormatDuration(leg.minutes) + "\n";
    if (k + 1 == it.legs.size()) {
      out += "    " + Name(inst, leg.to) + " (end)\n";
      break;
    }
    char idx[16];
    std::snprintf(idx, sizeof idx, "%2zu. ", k + 2);
    out += idx + Name(inst, leg.to) + ", stay " + FormatDuration(it.stays[k].minutes) + "\n";
  }
  out += "Total time: " + FormatDuration(it.total_minutes) + " (budget " +
         FormatDuration(inst.budget_minutes) + ", remaining " +
         FormatDuration(std::max(0.0, inst.budget_minutes - it.total_minutes)) + ")\n";
  out += "Stops: " + std::to_string(it.poi_count()) + ", reward " + Num(it.total_reward) +
         ", objective " + Num(it.objective) + "\n";
  return out;
}

std::string FormatMealPlan(const MealInstance& meal, const MealPlan& plan) {
  std::string out = meal.recipe_title.empty() ? std::string("Meal plan\n") : meal.recipe_title + "\n";
  if (plan.scale_factor < 1.0) {
    out += "Must-have ingredients scaled by " + Num(plan.scale_factor) + " to fit the limit.\n";
  }
  for (const auto& m : plan.scaled_must_have) {
    out += "  - " + m.name + ": " + Num(m.quantity) + (m.unit.empty() ? "" : " " + m.unit) + " (" +
           Num(m.kcal) + " kcal)\n";
  }
  for (const auto& name : plan.selected_optionals) out += "  + " + name + " (optional)\n";
  out += "Total: " + Num(plan.total_calories) + " of " + Num(meal.calorie_limit) + " kcal, priority " +
         Num(plan.total_priority) + "\n";
  return out;
}

}  // namespace prefopt
