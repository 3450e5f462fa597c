#pragma once

// Built-in prompt templates. Each template pairs a system text with {slot}
// placeholders and the id of the JSON schema the reply must follow.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "prefopt/llm.hpp"

namespace prefopt {

namespace schema {
inline constexpr const char* kTripCandidates = "trip_candidates/1";
inline constexpr const char* kValueLists = "value_lists/1";
inline constexpr const char* kMealRecipes = "meal_recipes/1";
inline constexpr const char* kMealIngredients = "meal_ingredients/1";
inline constexpr const char* kRoute = "route/1";
}  // namespace schema

struct PromptTemplate {
  TemplateKind kind = TemplateKind::kTripEnumeration;
  std::string built_in_text;
  std::string output_schema;
};

using Bindings = std::map<std::string, std::string>;

const PromptTemplate& BuiltInTemplate(TemplateKind kind);

// Slot names in order of first appearance. "{{" and "}}" are literal braces.
std::vector<std::string> TemplateSlots(const std::string& text);

// Throws Error(kMissingBinding) naming the first unbound slot.
std::string Render(const std::string& text, const Bindings& bindings);

// System message for a template: rendered text plus the schema description.
std::string RenderSystemPrompt(const PromptTemplate& tmpl, const Bindings& bindings);

// Value-assignment human prompt: the preference paragraph, a blank line,
// then one "- item" line per item.
std::string ValueAssignmentHumanPrompt(const std::string& preference,
                                       std::span<const std::string> items);

// Short description of a schema's JSON shape, appended to system prompts.
std::string SchemaDescription(const std::string& schema_id);

}  // namespace prefopt
