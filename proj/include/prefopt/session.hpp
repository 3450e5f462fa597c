#pragma once

// The interactive loop: enumerate -> select -> optimize, repeated. Each
// step appends events to an append-only history; request events carry
// enough data to replay the session against the same backends.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "prefopt/instance_io.hpp"
#include "prefopt/instantiation.hpp"
#include "prefopt/knapsack.hpp"
#include "prefopt/op_solver.hpp"
#include "prefopt/providers.hpp"

namespace prefopt {

enum class TaskKind { kTrip, kMeal };
enum class SessionStatus { kEnumerating, kSelecting, kAssigned, kSolved };

const char* TaskKindName(TaskKind kind);
std::optional<TaskKind> ParseTaskKind(const std::string& name);
const char* SessionStatusName(SessionStatus status);

namespace event {
inline constexpr const char* kCreated = "created";
inline constexpr const char* kEnumerateRequested = "enumerate_requested";
inline constexpr const char* kCandidatesReturned = "candidates_returned";
inline constexpr const char* kEnumerateFailed = "enumerate_failed";
inline constexpr const char* kSelectionChanged = "selection_changed";
inline constexpr const char* kOptimizeRequested = "optimize_requested";
inline constexpr const char* kValuesAssigned = "values_assigned";
inline constexpr const char* kIngredientsCategorized = "ingredients_categorized";
inline constexpr const char* kSolveCompleted = "solve_completed";
inline constexpr const char* kOptimizeFailed = "optimize_failed";
}  // namespace event

struct SessionEvent {
  std::size_t index = 0;
  std::string type;
  Json payload = Json::object();
  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

struct SessionState {
  std::string id;
  TaskKind task = TaskKind::kTrip;
  SessionStatus status = SessionStatus::kEnumerating;
  std::vector<SessionEvent> history;
  CandidateSet candidates;
  std::vector<std::string> selected_ids;  // trips: first is the depot
  double budget = 0.0;                    // minutes (trip) or kcal (meal)

  std::optional<ValueAssignment> last_values;
  std::optional<OpInstance> last_instance;
  std::optional<Itinerary> last_solution;
  std::optional<MealInstance> last_meal;
  std::optional<MealPlan> last_plan;
  std::string last_note;

  void Append(std::string type, Json payload);
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

Json SessionToJson(const SessionState& state);
SessionState SessionFromJson(const Json& j);
Json CandidateToJson(const Candidate& c);

// Everything a step needs besides the state. Backends are shared; the first
// one also handles value assignment and ingredient categorization.
struct SessionDeps {
  std::vector<std::shared_ptr<LlmBackend>> backends;
  std::shared_ptr<Provider> provider;
  SolverConfig solver;
  KnapsackConfig knapsack;
  InstantiationOptions llm;
};

SessionState NewSession(std::string id, TaskKind task);

// Steps mutate `state` in place. On failure they leave the state as it was
// before the call, plus the request and failure events, and rethrow.
void StepEnumerate(SessionState& state, const SessionDeps& deps, const std::string& preference,
                   std::size_t backend_count, const std::vector<Attachment>& attachments = {});
// Unknown ids leave the state untouched.
void StepSelect(SessionState& state, const std::vector<std::string>& ids);
void StepOptimize(SessionState& state, const SessionDeps& deps, const std::string& preference,
                  double budget, const std::vector<Attachment>& attachments = {});

// Re-runs the request events of `state.history` on a fresh session.
SessionState Replay(const SessionState& state, const SessionDeps& deps);

// True when every stored solution fits its stored instance, recomputed from
// scratch.
bool SolutionConsistent(const SessionState& state);

class SessionStore {
 public:
  virtual ~SessionStore() = default;
  virtual std::string NextId() = 0;
  // Writes the snapshot and appends history events not yet stored.
  virtual void Save(const SessionState& state) = 0;
  virtual std::optional<SessionState> Load(const std::string& id) = 0;
  // Stored event log, independent of the snapshot.
  virtual std::vector<SessionEvent> Events(const std::string& id) = 0;
};

class MemoryStore : public SessionStore {
 public:
  std::string NextId() override;
  void Save(const SessionState& state) override;
  std::optional<SessionState> Load(const std::string& id) override;
  std::vector<SessionEvent> Events(const std::string& id) override;

 private:
  std::mutex mu_;
  std::size_t counter_ = 0;
  std::map<std::string, std::string> snapshots_;
  std::map<std::string, std::vector<SessionEvent>> events_;
};

// Single-file SQLite store: one snapshot row per session plus the event log.
class SqliteStore : public SessionStore {
 public:
  explicit SqliteStore(const std::filesystem::path& file);
  ~SqliteStore() override;
  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  std::string NextId() override;
  void Save(const SessionState& state) override;
  std::optional<SessionState> Load(const std::string& id) override;
  std::vector<SessionEvent> Events(const std::string& id) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Serializes requests per session; different sessions run concurrently.
class SessionService {
 public:
  SessionService(std::shared_ptr<SessionStore> store, SessionDeps deps)
      : store_(std::move(store)), deps_(std::move(deps)) {}

  SessionState Create(TaskKind task);
  // Throws kNotFound.
  SessionState Get(const std::string& id);
  SessionState Enumerate(const std::string& id, const std::string& preference,
                         std::size_t backend_count, const std::vector<Attachment>& attachments = {});
  SessionState Select(const std::string& id, const std::vector<std::string>& ids);
  SessionState Optimize(const std::string& id, const std::string& preference, double budget,
                        const std::vector<Attachment>& attachments = {});

  const SessionDeps& deps() const { return deps_; }

 private:
  std::shared_ptr<std::mutex> LockFor(const std::string& id);
  template <class Step>
  SessionState Mutate(const std::string& id, Step step);

  std::shared_ptr<SessionStore> store_;
  SessionDeps deps_;
  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace prefopt
