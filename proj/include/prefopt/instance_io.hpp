#pragma once

// JSON file formats: `lappi-op/1` trip instances, `lappi-meal/1` meal
// instances, and the itinerary / meal-plan outputs. Writers emit a fixed
// key order so write -> read -> write is byte-stable.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "prefopt/model.hpp"

namespace prefopt {

inline constexpr const char* kOpFormat = "lappi-op/1";
inline constexpr const char* kMealFormat = "lappi-meal/1";

using Json = nlohmann::ordered_json;

Json OpInstanceToJson(const OpInstance& instance);
OpInstance OpInstanceFromJson(const Json& j);

Json MealInstanceToJson(const MealInstance& instance);
MealInstance MealInstanceFromJson(const Json& j);

Json ItineraryToJson(const Itinerary& itinerary);
Itinerary ItineraryFromJson(const Json& j);

Json MealPlanToJson(const MealPlan& plan);
MealPlan MealPlanFromJson(const Json& j);

Json SpotToJson(const Spot& spot);
Spot SpotFromJson(const Json& j);

// Text helpers. Parse errors and schema violations throw kInvalidInput.
Json ParseJson(const std::string& text);
std::string DumpJson(const Json& j);  // 2-space indent, trailing newline

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& content);

OpInstance LoadOpInstance(const std::filesystem::path& path);
void SaveOpInstance(const std::filesystem::path& path, const OpInstance& instance);
MealInstance LoadMealInstance(const std::filesystem::path& path);
void SaveMealInstance(const std::filesystem::path& path, const MealInstance& instance);

}  // namespace prefopt
