#pragma once

// Problem instantiation with language-model backends: candidate
// enumeration, value assignment, ingredient categorization and the
// model-as-solver baseline.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prefopt/error.hpp"
#include "prefopt/llm.hpp"
#include "prefopt/model.hpp"
#include "prefopt/prompts.hpp"

namespace prefopt {

// A trip place or a meal recipe proposed by one or more backends.
struct Candidate {
  std::string id;
  std::string name;     // place name or recipe title
  std::string address;  // trips only
  std::string reason;
  std::optional<double> kcal;  // meals only
  std::optional<double> lat;   // set once geocoded
  std::optional<double> lon;
  std::set<std::string> sources;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct BackendFailure {
  std::string backend;
  ErrorCode code = ErrorCode::kParseFailure;
  std::string message;
  friend bool operator==(const BackendFailure&, const BackendFailure&) = default;
};

struct CandidateSet {
  std::vector<Candidate> items;
  std::string note;  // overall reason for meal suggestions
  std::vector<BackendFailure> failures;

  const Candidate* Find(const std::string& id) const;
  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

struct InstantiationOptions {
  int retries = kDefaultParseRetries;  // re-asks after the first attempt
  double temperature = kDefaultTemperature;
  std::vector<Attachment> attachments;
  std::size_t max_items = 10;    // trip enumeration
  std::size_t recipe_count = 5;  // meal enumeration
};

// Case-folded, whitespace-collapsed name plus the address up to the first
// comma or newline, also normalized.
std::string DedupKey(const std::string& name, const std::string& address);

// Lower-case ASCII slug of `name`, made unique against `taken`.
std::string MakeCandidateId(const std::string& name, const std::set<std::string>& taken);

// Adds `incoming` into `base`; equal keys merge their sources. New items get
// ids unique within `base`. Existing items keep their ids and position.
void MergeCandidates(CandidateSet& base, const CandidateSet& incoming);

// Queries every backend concurrently with the rendered template and merges
// the parsed candidates in backend order. Backends that fail are listed in
// `failures`; throws kAllBackendsFailed when none succeeds.
CandidateSet EnumerateItems(const std::string& preference, TemplateKind kind,
                            std::span<LlmBackend* const> backends,
                            const InstantiationOptions& options = {});

// One score and duration per item, aligned with `items`. For trip templates
// the first item is the depot and is forced to (0, 0).
ValueAssignment AssignValues(const std::string& preference, std::span<const std::string> items,
                             TemplateKind kind, LlmBackend& backend,
                             const InstantiationOptions& options = {});

struct CategorizedMeal {
  MealInstance meal;
  std::string note;
  std::vector<std::string> removed;  // ingredients dropped by removal requests
};

// Ingredient split for a chosen recipe. Removal requests in the preference
// ("remove X", "without X", "no X") are enforced after parsing.
CategorizedMeal CategorizeIngredients(const std::string& recipe_choice,
                                      const std::string& preference, double calorie_limit,
                                      LlmBackend& backend,
                                      const InstantiationOptions& options = {});

// Ingredient names named by removal requests, lower-cased.
std::vector<std::string> RemovalRequests(const std::string& preference);

// Renders the instance with numeric node ids (0 = depot) and asks the
// backend for a route. The route is evaluated, not repaired: the result may
// exceed the budget (status kOverBudget).
Itinerary LlmOpBaseline(const OpInstance& instance, LlmBackend& backend,
                        const InstantiationOptions& options = {});

// The exact messages LlmOpBaseline sends; exposed for fixture generation.
LlmRequest BaselineRequest(const OpInstance& instance, const InstantiationOptions& options = {});

// Extracts the JSON object from a reply, tolerating code fences and
// surrounding prose. Throws kParseFailure.
nlohmann::json ParseReply(const std::string& text);

}  // namespace prefopt
