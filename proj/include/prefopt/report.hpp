#pragma once

// Human-readable plan text for the CLI and the API.

#include <string>

#include "prefopt/model.hpp"

namespace prefopt {

// Numbered stops with the travel leg into each stop, the stay, and a footer
// comparing the total with the budget. Durations use FormatDuration.
std::string FormatItinerary(const OpInstance& instance, const Itinerary& itinerary);

std::string FormatMealPlan(const MealInstance& meal, const MealPlan& plan);

}  // namespace prefopt
