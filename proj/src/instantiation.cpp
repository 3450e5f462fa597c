#include "prefopt/instantiation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>

namespace prefopt {
namespace {

using nlohmann::json;

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string CollapseSpace(const std::string& s) {
  std::string out;
  bool pending = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += static_cast<char>(c);
  }
  return out;
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

[[noreturn]] void Reject(const std::string& why) { throw Error(ErrorCode::kParseFailure, why); }

const json& Field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) Reject(std::string("missing field '") + key + "'");
  return obj.at(key);
}

std::string StringField(const json& obj, const char* key, bool required = true) {
  if (!required && (!obj.is_object() || !obj.contains(key))) return "";
  const json& v = Field(obj, key);
  if (!v.is_string()) Reject(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double NumberField(const json& v, const std::string& what) {
  if (!v.is_number()) Reject(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) Reject(what + " must be finite");
  return d;
}

const json& ArrayField(const json& obj, const char* key) {
  const json& v = Field(obj, key);
  if (!v.is_array()) Reject(std::string("field '") + key + "' must be an array");
  return v;
}

// Sends the request, parses the reply and re-asks up to `retries` times on
// kParseFailure or kLengthMismatch. Any other error is final.
template <class Parse>
auto AskWithRetries(LlmBackend& backend, LlmRequest request, int retries, Parse parse)
    -> decltype(parse(json{})) {
  Error last(ErrorCode::kParseFailure, "no attempt made");
  for (int attempt = 0; attempt <= retries; ++attempt) {
    const std::string raw = backend.Complete(request);
    try {
      return parse(ParseReply(raw));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseFailure && e.code() != ErrorCode::kLengthMismatch) throw;
      last = e;
      request.messages.push_back({"assistant", raw});
      request.messages.push_back(
          {"user", std::string("The reply was rejected: ") + e.what() +
                       ". Answer again with only the JSON object in the requested form."});
    }
  }
  throw Error(last.code(), backend.name() + ": " + last.what() + " (after " +
                               std::to_string(retries + 1) + " attempts)");
}

LlmRequest MakeRequest(TemplateKind kind, const Bindings& bindings, std::string user,
                       const InstantiationOptions& options) {
  const PromptTemplate& tmpl = BuiltInTemplate(kind);
  LlmRequest req;
  req.kind = kind;
  req.schema = tmpl.output_schema;
  req.temperature = options.temperature;
  req.attachments = options.attachments;
  req.messages.push_back({"system", RenderSystemPrompt(tmpl, bindings)});
  req.messages.push_back({"user", std::move(user)});
  return req;
}

CandidateSet ParseTripCandidates(const json& j, const std::string& backend) {
  CandidateSet out;
  for (const json& p : ArrayField(j, "places")) {
    Candidate c;
    c.name = StringField(p, "name");
    c.address = StringField(p, "address");
    c.reason = StringField(p, "reason", false);
    if (CollapseSpace(c.name).empty()) Reject("place name is empty");
    if (CollapseSpace(c.address).empty()) Reject("place '" + c.name + "' has no address");
    c.sources.insert(backend);
    out.items.push_back(std::move(c));
  }
  return out;
}

CandidateSet ParseMealCandidates(const json& j, const std::string& backend) {
  CandidateSet out;
  for (const json& r : ArrayField(j, "recipes")) {
    Candidate c;
    c.name = StringField(r, "title");
    c.reason = StringField(r, "reason", false);
    c.kcal = NumberField(Field(r, "kcal"), "kcal");
    if (CollapseSpace(c.name).empty()) Reject("recipe title is empty");
    if (*c.kcal < 0) Reject("recipe kcal must be non-negative");
    c.sources.insert(backend);
    out.items.push_back(std::move(c));
  }
  out.note = StringField(j, "overall_reason", false);
  return out;
}

bool ContainsWord(const std::string& haystack, const std::string& needle) {
  return !needle.empty() && haystack.find(needle) != std::string::npos;
}

}  // namespace

const Candidate* CandidateSet::Find(const std::string& id) const {
  for (const auto& c : items) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

nlohmann::json ParseReply(const std::string& text) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    Reject("reply contains no JSON object");
  }
  json j = json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded()) Reject("reply is not valid JSON");
  return j;
}

std::string DedupKey(const std::string& name, const std::string& address) {
  const std::string first_line = address.substr(0, address.find_first_of(",\n"));
  return Lower(CollapseSpace(name)) + "|" + Lower(CollapseSpace(first_line));
}

std::string MakeCandidateId(const std::string& name, const std::set<std::string>& taken) {
  std::string slug;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      slug += static_cast<char>(std::tolower(c));
    } else if (!slug.empty() && slug.back() != '-') {
      slug += '-';
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  if (slug.empty()) slug = "item";
  if (!taken.count(slug)) return slug;
  for (int k = 2;; ++k) {
    std::string id = slug + "-" + std::to_string(k);
    if (!taken.count(id)) return id;
  }
}

void MergeCandidates(CandidateSet& base, const CandidateSet& incoming) {
  std::map<std::string, std::size_t> by_key;
  std::set<std::string> taken;
  for (std::size_t i = 0; i < base.items.size(); ++i) {
    by_key.emplace(DedupKey(base.items[i].name, base.items[i].address), i);
    taken.insert(base.items[i].id);
  }
  for (const auto& c : incoming.items) {
    const std::string key = DedupKey(c.name, c.address);
    if (auto it = by_key.find(key); it != by_key.end()) {
      base.items[it->second].sources.insert(c.sources.begin(), c.sources.end());
      continue;
    }
    Candidate added = c;
    added.id = MakeCandidateId(c.name, taken);
    taken.insert(added.id);
    by_key.emplace(key, base.items.size());
    base.items.push_back(std::move(added));
  }
  if (base.note.empty()) base.note = incoming.note;
  base.failures.insert(base.failures.end(), incoming.failures.begin(), incoming.failures.end());
}

CandidateSet EnumerateItems(const std::string& preference, TemplateKind kind,
                            std::span<LlmBackend* const> backends,
                            const InstantiationOptions& options) {
  if (CollapseSpace(preference).empty()) {
    throw Error(ErrorCode::kPrecondition, "preference text is empty");
  }
  if (backends.empty()) throw Error(ErrorCode::kPrecondition, "no backend configured");
  Bindings bindings;
  bool trip = true;
  if (kind == TemplateKind::kTripEnumeration) {
    bindings["max_items"] = std::to_string(options.max_items);
  } else if (kind == TemplateKind::kMealEnumeration) {
    bindings["recipe_count"] = std::to_string(options.recipe_count);
    trip = false;
  } else {
    throw Error(ErrorCode::kInvalidInput, "not an enumeration template");
  }
  const LlmRequest request = MakeRequest(kind, bindings, preference, options);

  struct Outcome {
    std::optional<CandidateSet> set;
    BackendFailure failure;
  };
  std::vector<std::future<Outcome>> pending;
  for (LlmBackend* backend : backends) {
    pending.push_back(std::async(std::launch::async, [&request, backend, trip, &options] {
      Outcome o;
      try {
        o.set = AskWithRetries(*backend, request, options.retries, [&](const json& j) {
          return trip ? ParseTripCandidates(j, backend->name())
                      : ParseMealCandidates(j, backend->name());
        });
      } catch (const Error& e) {
        o.failure = {backend->name(), e.code(), e.what()};
      }
      return o;
    }));
  }

  CandidateSet merged;
  bool any = false;
  for (auto& f : pending) {
    Outcome o = f.get();
    if (o.set) {
      MergeCandidates(merged, *o.set);
      any = true;
    } else {
      merged.failures.push_back(std::move(o.failure));
    }
  }
  if (!any) {
    std::string detail;
    for (const auto& f : merged.failures) detail += "; " + f.message;
    throw Error(ErrorCode::kAllBackendsFailed, "every backend failed" + detail);
  }
  return merged;
}

ValueAssignment AssignValues(const std::string& preference, std::span<const std::string> items,
                             TemplateKind kind, LlmBackend& backend,
                             const InstantiationOptions& options) {
  if (items.empty()) throw Error(ErrorCode::kPrecondition, "no items to assign values to");
  if (kind != TemplateKind::kTripValueAssignment) {
    throw Error(ErrorCode::kInvalidInput, "not a value-assignment template");
  }
  const LlmRequest request =
      MakeRequest(kind, {{"item_count", std::to_string(items.size())}},
                  ValueAssignmentHumanPrompt(preference, items), options);

  return AskWithRetries(backend, request, options.retries, [&](const json& j) {
    const json& scores = ArrayField(j, "scores");
    const json& hours = ArrayField(j, "durations_hours");
    if (scores.size() != items.size() || hours.size() != items.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "expected " + std::to_string(items.size()) + " scores and durations, got " +
                      std::to_string(scores.size()) + " and " + std::to_string(hours.size()));
    }
    ValueAssignment va;
    for (std::size_t i = 0; i < items.size(); ++i) {
      double s = NumberField(scores[i], "score");
      double h = NumberField(hours[i], "duration");
      if (i == 0) {
        // The first item is the start and end point.
        va.score.push_back(0.0);
        va.duration_minutes.push_back(0.0);
        continue;
      }
      if (s < kMinScore || s > kMaxScore) {
        const double clamped = std::clamp(s, kMinScore, kMaxScore);
        va.warnings.push_back("score for '" + items[i] + "' clamped from " + FormatNumber(s) +
                              " to " + FormatNumber(clamped));
        s = clamped;
      }
      if (h < 0.0) {
        va.warnings.push_back("negative duration for '" + items[i] + "' set to 0");
        h = 0.0;
      }
      va.score.push_back(s);
      va.duration_minutes.push_back(h * kMinutesPerHour);
    }
    return va;
  });
}

std::vector<std::string> RemovalRequests(const std::string& preference) {
  // Split into clauses at punctuation and " and ".
  std::vector<std::string> clauses;
  std::string cur;
  const std::string text = Lower(preference);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::string_view(",.;:!?\n").find(c) != std::string_view::npos) {
      clauses.push_back(cur);
      cur.clear();
    } else if (text.compare(i, 5, " and ") == 0) {
      clauses.push_back(cur);
      cur.clear();
      i += 4;
    } else {
      cur += c;
    }
  }
  clauses.push_back(cur);

  std::vector<std::string> out;
  for (const auto& raw : clauses) {
    const std::string clause = " " + CollapseSpace(raw);
    for (const char* verb : {" remove ", " without ", " no "}) {
      const auto at = clause.find(verb);
      if (at == std::string::npos) continue;
      std::string target = CollapseSpace(clause.substr(at + std::string_view(verb).size()));
      for (const char* article : {"the ", "any ", "all "}) {
        if (target.rfind(article, 0) == 0) target = target.substr(std::string_view(article).size());
      }
      if (!target.empty()) out.push_back(target);
      break;
    }
  }
  return out;
}

CategorizedMeal CategorizeIngredients(const std::string& recipe_choice,
                                      const std::string& preference, double calorie_limit,
                                      LlmBackend& backend, const InstantiationOptions& options) {
  if (CollapseSpace(recipe_choice).empty()) {
    throw Error(ErrorCode::kPrecondition, "no recipe chosen");
  }
  if (!(calorie_limit > 0.0)) throw Error(ErrorCode::kPrecondition, "calorie limit must be positive");
  std::string user = "Dish: " + recipe_choice + "\n";
  if (!CollapseSpace(preference).empty()) user += "Preferences: " + preference + "\n";
  user += "Calorie limit: " + FormatNumber(calorie_limit) + " kcal\n";
  const LlmRequest request = MakeRequest(TemplateKind::kMealValueAssignment,
                                         {{"calorie_limit", FormatNumber(calorie_limit)}},
                                         std::move(user), options);

  CategorizedMeal out = AskWithRetries(backend, request, options.retries, [&](const json& j) {
    CategorizedMeal cm;
    cm.meal.recipe_title = StringField(j, "recipe", false);
    if (cm.meal.recipe_title.empty()) cm.meal.recipe_title = recipe_choice;
    cm.meal.calorie_limit = calorie_limit;
    for (const json& m : ArrayField(j, "must_have")) {
      cm.meal.must_have.push_back({StringField(m, "name"), NumberField(Field(m, "qty"), "qty"),
                                   StringField(m, "unit", false),
                                   NumberField(Field(m, "kcal"), "kcal")});
    }
    for (const json& o : ArrayField(j, "optional")) {
      cm.meal.optional.push_back({StringField(o, "name"),
                                  NumberField(Field(o, "priority"), "priority"),
                                  NumberField(Field(o, "kcal"), "kcal")});
    }
    cm.note = StringField(j, "note", false);
    if (auto v = cm.meal.Validate(); !v.empty()) Reject("ingredient list invalid: " + v.front());
    return cm;
  });

  const auto removals = RemovalRequests(preference);
  auto removed = [&](const std::string& name) {
    const std::string n = Lower(name);
    for (const auto& r : removals) {
      if (n == r || ContainsWord(n, r) || ContainsWord(r, n)) return true;
    }
    return false;
  };
  auto drop = [&](auto& list) {
    std::erase_if(list, [&](const auto& item) {
      if (!removed(item.name)) return false;
      out.removed.push_back(item.name);
      return true;
    });
  };
  drop(out.meal.must_have);
  drop(out.meal.optional);
  return out;
}

LlmRequest BaselineRequest(const OpInstance& inst, const InstantiationOptions& options) {
  // Node k is the k-th spot with the depot moved to the front.
  std::vector<std::size_t> node;
  node.push_back(inst.depot_index);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (i != inst.depot_index) node.push_back(i);
  }
  std::string user = "Budget: " + FormatNumber(inst.budget_minutes) + " minutes\n";
  user += "Nodes (id: score, stay minutes):\n";
  for (std::size_t k = 0; k < node.size(); ++k) {
    user += std::to_string(k) + ": " + FormatNumber(inst.score[node[k]]) + ", " +
            FormatNumber(inst.duration[node[k]]) + "\n";
  }
  user += "Travel minutes (row = from, column = to):\n";
  for (std::size_t a = 0; a < node.size(); ++a) {
    user += std::to_string(a) + ":";
    for (std::size_t b = 0; b < node.size(); ++b) {
      user += " " + FormatNumber(inst.travel_time(node[a], node[b]));
    }
    user += "\n";
  }

  static const std::string kExamples =
      "Example 1\n"
      "Budget: 100 minutes\n"
      "Nodes (id: score, stay minutes):\n0: 0, 0\n1: 5, 20\n2: 8, 30\n"
      "Travel minutes (row = from, column = to):\n0: 0 10 10\n1: 10 0 10\n2: 10 10 0\n"
      "Answer: {\"route\": [0, 1, 2, 0]}\n"
      "\n"
      "Example 2\n"
      "Budget: 60 minutes\n"
      "Nodes (id: score, stay minutes):\n0: 0, 0\n1: 4, 20\n2: 9, 25\n"
      "Travel minutes (row = from, column = to):\n0: 0 10 12\n1: 10 0 15\n2: 12 15 0\n"
      "Answer: {\"route\": [0, 2, 0]}\n";
  return MakeRequest(TemplateKind::kOpBaseline, {{"examples", kExamples}}, std::move(user),
                     options);
}

Itinerary LlmOpBaseline(const OpInstance& inst, LlmBackend& backend,
                        const InstantiationOptions& options) {
  if (auto v = ValidateInstance(inst); !v.empty()) {
    throw Error(ErrorCode::kPrecondition, "invalid instance: " + v.front());
  }
  std::vector<std::size_t> node;
  node.push_back(inst.depot_index);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (i != inst.depot_index) node.push_back(i);
  }

  const std::vector<SpotId> route =
      AskWithRetries(backend, BaselineRequest(inst, options), options.retries, [&](const json& j) {
        const json& arr = ArrayField(j, "route");
        std::vector<long long> ids;
        for (const json& v : arr) {
          if (!v.is_number_integer()) Reject("route entries must be integers");
          ids.push_back(v.get<long long>());
        }
        for (long long id : ids) {
          if (id < 0 || id >= static_cast<long long>(node.size())) {
            throw Error(ErrorCode::kUnknownSpotId, "route names unknown node " + std::to_string(id));
          }
        }
        if (!ids.empty() && ids.front() == 0) ids.erase(ids.begin());
        if (!ids.empty() && ids.back() == 0) ids.pop_back();
        std::set<long long> seen;
        std::vector<SpotId> out{inst.depot_id()};
        for (long long id : ids) {
          if (id == 0) Reject("route passes the start node mid-tour");
          if (!seen.insert(id).second) Reject("route visits node " + std::to_string(id) + " twice");
          out.push_back(inst.spots[node[id]].id);
        }
        out.push_back(inst.depot_id());
        return out;
      });
  if (route.size() == 2) return EvaluateRoute(inst, std::span<const SpotId>{});
  return EvaluateRoute(inst, route);
}

}  // namespace prefopt
