#include "prefopt/session.hpp"

#include <algorithm>

#include "prefopt/error.hpp"

namespace prefopt {

const char* TaskKindName(TaskKind kind) { return kind == TaskKind::kTrip ? "trip" : "meal"; }

std::optional<TaskKind> ParseTaskKind(const std::string& name) {
  if (name == "trip") return TaskKind::kTrip;
  if (name == "meal") return TaskKind::kMeal;
  return std::nullopt;
}

const char* SessionStatusName(SessionStatus status) {
  switch (status) {
    case SessionStatus::kEnumerating: return "enumerating";
    case SessionStatus::kSelecting: return "selecting";
    case SessionStatus::kAssigned: return "assigned";
    case SessionStatus::kSolved: return "solved";
  }
  return "unknown";
}

namespace {

SessionStatus ParseStatus(const std::string& s) {
  for (auto st : {SessionStatus::kEnumerating, SessionStatus::kSelecting, SessionStatus::kAssigned,
                  SessionStatus::kSolved}) {
    if (s == SessionStatusName(st)) return st;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown session status " + s);
}

template <class T>
Json OptionalNumber(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> NumberOrNull(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json AttachmentsToJson(const std::vector<Attachment>& attachments) {
  Json out = Json::array();
  for (const auto& a : attachments) {
    out.push_back({{"mime", a.mime_type}, {"base64", Base64Encode(a.data)}});
  }
  return out;
}

std::vector<Attachment> AttachmentsFromJson(const Json& j) {
  std::vector<Attachment> out;
  if (!j.is_array()) return out;
  for (const auto& a : j) {
    out.push_back({a.at("mime").get<std::string>(), Base64Decode(a.at("base64").get<std::string>())});
  }
  return out;
}

Json ValuesToJson(const ValueAssignment& va) {
  return {{"scores", va.score}, {"durations_min", va.duration_minutes}, {"warnings", va.warnings}};
}

ValueAssignment ValuesFromJson(const Json& j) {
  ValueAssignment va;
  va.score = j.at("scores").get<std::vector<double>>();
  va.duration_minutes = j.at("durations_min").get<std::vector<double>>();
  va.warnings = j.at("warnings").get<std::vector<std::string>>();
  return va;
}

Json FailureJson(const Error& e) {
  return {{"code", std::string(ErrorCodeName(e.code()))}, {"message", e.what()}};
}

Candidate CandidateFromJson(const Json& j) {
  Candidate c;
  c.id = j.at("id").get<std::string>();
  c.name = j.at("name").get<std::string>();
  c.address = j.at("address").get<std::string>();
  c.reason = j.at("reason").get<std::string>();
  c.kcal = NumberOrNull(j.at("kcal"));
  c.lat = NumberOrNull(j.at("lat"));
  c.lon = NumberOrNull(j.at("lon"));
  for (const auto& s : j.at("sources")) c.sources.insert(s.get<std::string>());
  return c;
}

ErrorCode CodeFromName(const std::string& name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kStorageError); ++c) {
    if (ErrorCodeName(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  return ErrorCode::kBackendError;
}

Spot ToSpot(const Candidate& c) {
  Spot s;
  s.id = c.id;
  s.name = c.name;
  s.address = c.address;
  s.lat = c.lat.value_or(0.0);
  s.lon = c.lon.value_or(0.0);
  s.reason = c.reason;
  s.sources = c.sources;
  return s;
}

// Runs `body` on `state`; on failure restores the state, records the request
// and failure events, and rethrows as prefopt::Error.
template <class Body>
void Guarded(SessionState& state, const char* request_type, const Json& request,
             const char* failure_type, Body body) {
  SessionState before = state;
  try {
    body();
  } catch (const Error& e) {
    state = std::move(before);
    state.Append(request_type, request);
    state.Append(failure_type, FailureJson(e));
    throw;
  } catch (const std::exception& e) {
    const Error wrapped(ErrorCode::kBackendError, e.what());
    state = std::move(before);
    state.Append(request_type, request);
    state.Append(failure_type, FailureJson(wrapped));
    throw wrapped;
  }
}

void GeocodeMissing(CandidateSet& set, Provider& provider) {
  for (auto& c : set.items) {
    if (c.lat) continue;
    for (const std::string* query : {&c.address, &c.name}) {
      if (query->empty()) continue;
      try {
        const LatLon p = provider.Geocode(*query);
        c.lat = p.lat;
        c.lon = p.lon;
        break;
      } catch (const Error&) {
        // Left without coordinates; the caller decides whether that matters.
      }
    }
  }
}

}  // namespace

void SessionState::Append(std::string type, Json payload) {
  history.push_back({history.size(), std::move(type), std::move(payload)});
}

Json CandidateToJson(const Candidate& c) {
  Json sources = Json::array();
  for (const auto& s : c.sources) sources.push_back(s);
  return {{"id", c.id},
          {"name", c.name},
          {"address", c.address},
          {"reason", c.reason},
          {"kcal", OptionalNumber(c.kcal)},
          {"lat", OptionalNumber(c.lat)},
          {"lon", OptionalNumber(c.lon)},
          {"sources", std::move(sources)}};
}

Json SessionToJson(const SessionState& s) {
  Json items = Json::array();
  for (const auto& c : s.candidates.items) items.push_back(CandidateToJson(c));
  Json failures = Json::array();
  for (const auto& f : s.candidates.failures) {
    failures.push_back({{"backend", f.backend},
                        {"code", std::string(ErrorCodeName(f.code))},
                        {"message", f.message}});
  }
  Json history = Json::array();
  for (const auto& e : s.history) {
    history.push_back({{"index", e.index}, {"type", e.type}, {"payload", e.payload}});
  }
  return {
      {"id", s.id},
      {"task", TaskKindName(s.task)},
      {"status", SessionStatusName(s.status)},
      {"budget", s.budget},
      {"selected_ids", s.selected_ids},
      {"candidates", {{"items", std::move(items)}, {"note", s.candidates.note}, {"failures", std::move(failures)}}},
      {"last_values", s.last_values ? ValuesToJson(*s.last_values) : Json(nullptr)},
      {"last_instance", s.last_instance ? OpInstanceToJson(*s.last_instance) : Json(nullptr)},
      {"last_solution", s.last_solution ? ItineraryToJson(*s.last_solution) : Json(nullptr)},
      {"last_meal", s.last_meal ? MealInstanceToJson(*s.last_meal) : Json(nullptr)},
      {"last_plan", s.last_plan ? MealPlanToJson(*s.last_plan) : Json(nullptr)},
      {"last_note", s.last_note},
      {"history", std::move(history)},
  };
}

SessionState SessionFromJson(const Json& j) {
  try {
    SessionState s;
    s.id = j.at("id").get<std::string>();
    auto task = ParseTaskKind(j.at("task").get<std::string>());
    if (!task) throw Error(ErrorCode::kInvalidInput, "unknown task kind");
    s.task = *task;
    s.status = ParseStatus(j.at("status").get<std::string>());
    s.budget = j.at("budget").get<double>();
    s.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
    const Json& cands = j.at("candidates");
    for (const auto& c : cands.at("items")) s.candidates.items.push_back(CandidateFromJson(c));
    s.candidates.note = cands.at("note").get<std::string>();
    for (const auto& f : cands.at("failures")) {
      s.candidates.failures.push_back({f.at("backend").get<std::string>(),
                                       CodeFromName(f.at("code").get<std::string>()),
                                       f.at("message").get<std::string>()});
    }
    if (!j.at("last_values").is_null()) s.last_values = ValuesFromJson(j.at("last_values"));
    if (!j.at("last_instance").is_null()) s.last_instance = OpInstanceFromJson(j.at("last_instance"));
    if (!j.at("last_solution").is_null()) s.last_solution = ItineraryFromJson(j.at("last_solution"));
    if (!j.at("last_meal").is_null()) s.last_meal = MealInstanceFromJson(j.at("last_meal"));
    if (!j.at("last_plan").is_null()) s.last_plan = MealPlanFromJson(j.at("last_plan"));
    s.last_note = j.at("last_note").get<std::string>();
    for (const auto& e : j.at("history")) {
      s.history.push_back({e.at("index").get<std::size_t>(), e.at("type").get<std::string>(), e.at("payload")});
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed session snapshot: ") + e.what());
  }
}

SessionState NewSession(std::string id, TaskKind task) {
  SessionState s;
  s.id = std::move(id);
  s.task = task;
  s.Append(event::kCreated, {{"task", TaskKindName(task)}});
  return s;
}

void StepEnumerate(SessionState& state, const SessionDeps& deps, const std::string& preference,
                   std::size_t backend_count, const std::vector<Attachment>& attachments) {
  const Json request = {{"preference", preference},
                        {"backends", backend_count},
                        {"attachments", AttachmentsToJson(attachments)}};
  Guarded(state, event::kEnumerateRequested, request, event::kEnumerateFailed, [&] {
    state.Append(event::kEnumerateRequested, request);
    if (backend_count == 0 || backend_count > deps.backends.size()) {
      throw Error(ErrorCode::kPrecondition, "requested " + std::to_string(backend_count) +
                                                " backends, " + std::to_string(deps.backends.size()) +
                                                " configured");
    }
    std::vector<LlmBackend*> pool;
    for (std::size_t i = 0; i < backend_count; ++i) pool.push_back(deps.backends[i].get());
    InstantiationOptions options = deps.llm;
    options.attachments = attachments;
    const TemplateKind kind = state.task == TaskKind::kTrip ? TemplateKind::kTripEnumeration
                                                            : TemplateKind::kMealEnumeration;
    CandidateSet fresh = EnumerateItems(preference, kind, pool, options);

    const std::size_t before = state.candidates.items.size();
    const auto failures = fresh.failures;
    fresh.failures.clear();
    MergeCandidates(state.candidates, fresh);
    if (state.task == TaskKind::kTrip && deps.provider) GeocodeMissing(state.candidates, *deps.provider);

    Json added = Json::array();
    for (std::size_t i = before; i < state.candidates.items.size(); ++i) {
      added.push_back(state.candidates.items[i].id);
    }
    Json failed = Json::array();
    for (const auto& f : failures) {
      failed.push_back({{"backend", f.backend}, {"code", std::string(ErrorCodeName(f.code))}, {"message", f.message}});
    }
    state.candidates.failures = failures;
    state.Append(event::kCandidatesReturned,
                 {{"added", std::move(added)}, {"total", state.candidates.items.size()}, {"failures", std::move(failed)}});
    if (state.status == SessionStatus::kEnumerating) state.status = SessionStatus::kSelecting;
  });
}

void StepSelect(SessionState& state, const std::vector<std::string>& ids) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!state.candidates.Find(id)) {
      throw Error(ErrorCode::kUnknownCandidateId, "unknown candidate id: " + id);
    }
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kInvalidInput, "candidate selected twice: " + id);
    }
  }
  state.selected_ids = ids;
  state.status = SessionStatus::kSelecting;
  state.Append(event::kSelectionChanged, {{"ids", ids}});
}

void StepOptimize(SessionState& state, const SessionDeps& deps, const std::string& preference,
                  double budget, const std::vector<Attachment>& attachments) {
  if (state.selected_ids.empty()) throw Error(ErrorCode::kPrecondition, "nothing selected");
  if (!(budget > 0.0)) throw Error(ErrorCode::kPrecondition, "budget must be positive");
  if (deps.backends.empty()) throw Error(ErrorCode::kPrecondition, "no backend configured");

  const Json request = {{"preference", preference},
                        {"budget", budget},
                        {"attachments", AttachmentsToJson(attachments)}};
  Guarded(state, event::kOptimizeRequested, request, event::kOptimizeFailed, [&] {
    state.Append(event::kOptimizeRequested, request);
    InstantiationOptions options = deps.llm;
    options.attachments = attachments;
    LlmBackend& backend = *deps.backends.front();

    if (state.task == TaskKind::kMeal) {
      const Candidate& recipe = *state.candidates.Find(state.selected_ids.front());
      CategorizedMeal cm = CategorizeIngredients(recipe.name, preference, budget, backend, options);
      state.Append(event::kIngredientsCategorized,
                   {{"meal", MealInstanceToJson(cm.meal)}, {"removed", cm.removed}, {"note", cm.note}});
      state.status = SessionStatus::kAssigned;
      MealPlan plan = PlanMeal(cm.meal, deps.knapsack);
      state.budget = budget;
      state.last_meal = std::move(cm.meal);
      state.last_plan = plan;
      state.last_note = std::move(cm.note);
      state.Append(event::kSolveCompleted, {{"plan", MealPlanToJson(plan)}});
      state.status = SessionStatus::kSolved;
      return;
    }

    if (!deps.provider) throw Error(ErrorCode::kPrecondition, "no travel-time provider configured");
    std::vector<std::string> names;
    for (const auto& id : state.selected_ids) names.push_back(state.candidates.Find(id)->name);
    ValueAssignment va = AssignValues(preference, names, TemplateKind::kTripValueAssignment, backend, options);
    state.Append(event::kValuesAssigned, ValuesToJson(va));
    state.status = SessionStatus::kAssigned;

    GeocodeMissing(state.candidates, *deps.provider);
    OpInstance inst;
    for (const auto& id : state.selected_ids) {
      const Candidate& c = *state.candidates.Find(id);
      if (!c.lat) throw Error(ErrorCode::kNotFound, "could not geocode " + c.name);
      inst.spots.push_back(ToSpot(c));
    }
    inst.depot_index = 0;
    inst.travel_time = deps.provider->TravelMatrix(inst.spots);
    inst.score = va.score;
    inst.duration = va.duration_minutes;
    inst.budget_minutes = budget;

    Itinerary it = Solve(ReduceInstance(inst), deps.solver);
    const Itinerary check = EvaluateRoute(inst, it.route);
    if (check.total_minutes > budget) {
      throw Error(ErrorCode::kPrecondition, "solver returned an over-budget tour");
    }
    state.budget = budget;
    state.last_values = std::move(va);
    state.last_instance = std::move(inst);
    state.last_solution = it;
    state.Append(event::kSolveCompleted, {{"status", SolveStatusName(it.status)},
                                          {"objective", it.objective},
                                          {"total_min", it.total_minutes},
                                          {"route", it.route}});
    state.status = SessionStatus::kSolved;
  });
}

SessionState Replay(const SessionState& recorded, const SessionDeps& deps) {
  SessionState s = NewSession(recorded.id, recorded.task);
  for (const auto& e : recorded.history) {
    try {
      if (e.type == event::kEnumerateRequested) {
        StepEnumerate(s, deps, e.payload.at("preference").get<std::string>(),
                      e.payload.at("backends").get<std::size_t>(),
                      AttachmentsFromJson(e.payload.value("attachments", Json::array())));
      } else if (e.type == event::kSelectionChanged) {
        StepSelect(s, e.payload.at("ids").get<std::vector<std::string>>());
      } else if (e.type == event::kOptimizeRequested) {
        StepOptimize(s, deps, e.payload.at("preference").get<std::string>(),
                     e.payload.at("budget").get<double>(),
                     AttachmentsFromJson(e.payload.value("attachments", Json::array())));
      }
    } catch (const Error&) {
      // Failed steps record their own events, as they did originally.
    }
  }
  return s;
}

bool SolutionConsistent(const SessionState& s) {
  if (s.last_solution) {
    if (!s.last_instance) return false;
    const Itinerary re = EvaluateRoute(*s.last_instance, s.last_solution->route);
    if (re.total_minutes != s.last_solution->total_minutes) return false;
    if (re.total_minutes > s.last_instance->budget_minutes) return false;
  }
  if (s.last_plan) {
    if (!s.last_meal) return false;
    if (s.last_plan->total_calories > s.last_meal->calorie_limit) return false;
  }
  return true;
}

// ---- service ----------------------------------------------------------------

std::shared_ptr<std::mutex> SessionService::LockFor(const std::string& id) {
  std::lock_guard lock(locks_mu_);
  auto& m = locks_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

SessionState SessionService::Create(TaskKind task) {
  SessionState s = NewSession(store_->NextId(), task);
  store_->Save(s);
  return s;
}

SessionState SessionService::Get(const std::string& id) {
  auto mu = LockFor(id);
  std::lock_guard lock(*mu);
  auto s = store_->Load(id);
  if (!s) throw Error(ErrorCode::kNotFound, "no session " + id);
  return *s;
}

template <class Step>
SessionState SessionService::Mutate(const std::string& id, Step step) {
  auto mu = LockFor(id);
  std::lock_guard lock(*mu);
  auto s = store_->Load(id);
  if (!s) throw Error(ErrorCode::kNotFound, "no session " + id);
  const std::size_t events_before = s->history.size();
  try {
    step(*s);
  } catch (const Error&) {
    // Persist failure events; state fields were already rolled back.
    if (s->history.size() != events_before) store_->Save(*s);
    throw;
  }
  store_->Save(*s);
  return *s;
}

SessionState SessionService::Enumerate(const std::string& id, const std::string& preference,
                                       std::size_t backend_count,
                                       const std::vector<Attachment>& attachments) {
  return Mutate(id, [&](SessionState& s) { StepEnumerate(s, deps_, preference, backend_count, attachments); });
}

SessionState SessionService::Select(const std::string& id, const std::vector<std::string>& ids) {
  return Mutate(id, [&](SessionState& s) { StepSelect(s, ids); });
}

SessionState SessionService::Optimize(const std::string& id, const std::string& preference,
                                      double budget, const std::vector<Attachment>& attachments) {
  return Mutate(id, [&](SessionState& s) { StepOptimize(s, deps_, preference, budget, attachments); });
}

}  // namespace prefopt
