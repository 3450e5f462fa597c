#include "prefopt/prompts.hpp"

#include <algorithm>

#include "prefopt/error.hpp"

namespace prefopt {
namespace {

const PromptTemplate kTemplates[] = {
    {TemplateKind::kTripEnumeration,
     "You are a travel planning assistant.\n"
     "Read the traveller's request and recommend places that fit it. For each place give "
     "its name, a specific street address and a reason tied to the request.\n"
     "\n"
     "Rules:\n"
     "- Every place must come with a specific address that a map service can find.\n"
     "- Explain each reason in terms of the traveller's stated preferences.\n"
     "- Recommend at most {max_items} places.\n",
     schema::kTripCandidates},
    {TemplateKind::kTripValueAssignment,
     "You will be given the traveller's preferences followed by a list of places.\n"
     "Turn the list into two lists of equal length: a compatibility score for each place "
     "and the time to spend at each place, in hours.\n"
     "\n"
     "Rules:\n"
     "- Scores range from 0 to 10 and reflect how well a place matches the preferences.\n"
     "- Durations are in hours; fractions are allowed.\n"
     "- The first place is the start and end point of the trip.\n"
     "- Return exactly {item_count} scores and {item_count} durations, in list order.\n",
     schema::kValueLists},
    {TemplateKind::kMealEnumeration,
     "You are a cooking assistant.\n"
     "Suggest {recipe_count} dishes that match the user's request, each with an estimated "
     "calorie count for one serving. If a photo of the refrigerator is attached, prefer "
     "dishes that use what is in it.\n"
     "\n"
     "Rules:\n"
     "- List exactly {recipe_count} dishes, best match first.\n"
     "- Give one short reason per dish and one overall reason for the selection.\n",
     schema::kMealRecipes},
    {TemplateKind::kMealValueAssignment,
     "You are a cooking assistant adapting the ingredient list of a chosen dish.\n"
     "The user names the dish, describes how they want it and sets a limit of "
     "{calorie_limit} kcal. Keep the dish itself; only adjust its ingredients.\n"
     "Split the ingredients into must-have items (with quantity, unit and kcal) and "
     "optional items (with a priority and kcal).\n"
     "\n"
     "Rules:\n"
     "- When asked to remove an ingredient, leave it out of both lists.\n"
     "- A strong request to add or favour an ingredient makes it must-have.\n"
     "- A mild request keeps the ingredient optional with a higher priority.\n"
     "- If a request cannot be met, say why in the note, in at most two sentences.\n",
     schema::kMealIngredients},
    {TemplateKind::kOpBaseline,
     "You solve orienteering problems given as numbered nodes.\n"
     "Node 0 is the start and end. Each node has a score and a stay time; travel times "
     "between nodes are given as a matrix in minutes. Choose an ordered tour from node 0 "
     "back to node 0 that maximizes the collected score while the total of travel and "
     "stay times stays within the budget. Visit each node at most once.\n"
     "\n"
     "{examples}",
     schema::kRoute},
};

}  // namespace

const PromptTemplate& BuiltInTemplate(TemplateKind kind) {
  for (const auto& t : kTemplates) {
    if (t.kind == kind) return t;
  }
  throw Error(ErrorCode::kInvalidInput, "no built-in template for this kind");
}

std::vector<std::string> TemplateSlots(const std::string& text) {
  std::vector<std::string> slots;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 2, "{{") == 0 || text.compare(i, 2, "}}") == 0) {
      ++i;
      continue;
    }
    if (text[i] != '{') continue;
    const auto close = text.find('}', i + 1);
    if (close == std::string::npos) break;
    std::string name = text.substr(i + 1, close - i - 1);
    if (std::find(slots.begin(), slots.end(), name) == slots.end()) slots.push_back(name);
    i = close;
  }
  return slots;
}

std::string Render(const std::string& text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 2, "{{") == 0 || text.compare(i, 2, "}}") == 0) {
      out += text[i];
      ++i;
      continue;
    }
    if (text[i] != '{') {
      out += text[i];
      continue;
    }
    const auto close = text.find('}', i + 1);
    if (close == std::string::npos) {
      throw Error(ErrorCode::kInvalidInput, "unterminated slot in template");
    }
    const std::string name = text.substr(i + 1, close - i - 1);
    const auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(ErrorCode::kMissingBinding, "no binding for slot {" + name + "}");
    }
    out += it->second;
    i = close;
  }
  return out;
}

std::string SchemaDescription(const std::string& id) {
  if (id == schema::kTripCandidates) {
    return R"({"places": [{"name": string, "address": string, "reason": string}]})";
  }
  if (id == schema::kValueLists) {
    return R"({"scores": [number], "durations_hours": [number]})";
  }
  if (id == schema::kMealRecipes) {
    return R"({"recipes": [{"title": string, "kcal": number, "reason": string}], "overall_reason": string})";
  }
  if (id == schema::kMealIngredients) {
    return R"({"recipe": string, "must_have": [{"name": string, "qty": number, "unit": string, "kcal": number}], )"
           R"("optional": [{"name": string, "priority": number, "kcal": number}], "note": string})";
  }
  if (id == schema::kRoute) return R"({"route": [integer]})";
  throw Error(ErrorCode::kInvalidInput, "unknown schema id " + id);
}

std::string RenderSystemPrompt(const PromptTemplate& tmpl, const Bindings& bindings) {
  return Render(tmpl.built_in_text, bindings) +
         "\nReply with a single JSON object of the form " + SchemaDescription(tmpl.output_schema) +
         " and nothing else.";
}

std::string ValueAssignmentHumanPrompt(const std::string& preference,
                                       std::span<const std::string> items) {
  std::string out = preference;
  out += "\n\n";
  for (const auto& item : items) {
    out += "- ";
    out += item;
    out += '\n';
  }
  return out;
}

}  // namespace prefopt
