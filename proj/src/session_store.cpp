#include <sqlite3.h>

#include "prefopt/error.hpp"
#include "prefopt/session.hpp"

namespace prefopt {

// ---- memory -------------------------------------------------------------------

std::string MemoryStore::NextId() {
  std::lock_guard lock(mu_);
  return "sess-" + std::to_string(++counter_);
}

void MemoryStore::Save(const SessionState& state) {
  std::lock_guard lock(mu_);
  snapshots_[state.id] = DumpJson(SessionToJson(state));
  auto& log = events_[state.id];
  for (std::size_t i = log.size(); i < state.history.size(); ++i) log.push_back(state.history[i]);
}

std::optional<SessionState> MemoryStore::Load(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = snapshots_.find(id);
  if (it == snapshots_.end()) return std::nullopt;
  return SessionFromJson(ParseJson(it->second));
}

std::vector<SessionEvent> MemoryStore::Events(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = events_.find(id);
  return it == events_.end() ? std::vector<SessionEvent>{} : it->second;
}

// ---- sqlite -------------------------------------------------------------------

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS sessions (id TEXT PRIMARY KEY, task TEXT NOT NULL, snapshot TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS events (
  session_id TEXT NOT NULL,
  idx INTEGER NOT NULL,
  type TEXT NOT NULL,
  payload TEXT NOT NULL,
  PRIMARY KEY (session_id, idx)
);
INSERT OR IGNORE INTO meta (key, value) VALUES ('next_session', 1);
)sql";

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) Fail("prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& Bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& Bind(int i, long long v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  // True while rows are available.
  bool Step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc != SQLITE_DONE) Fail("step");
    return false;
  }
  std::string Text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, sqlite3_column_bytes(stmt_, col)) : std::string();
  }
  long long Int(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  [[noreturn]] void Fail(const char* what) const {
    throw Error(ErrorCode::kStorageError, std::string("sqlite ") + what + ": " + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void Exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kStorageError, "sqlite: " + msg);
  }
}

}  // namespace

struct SqliteStore::Impl {
  sqlite3* db = nullptr;
  std::mutex mu;
};

SqliteStore::SqliteStore(const std::filesystem::path& file) : impl_(std::make_unique<Impl>()) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  if (sqlite3_open(file.string().c_str(), &impl_->db) != SQLITE_OK) {
    std::string msg = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
    sqlite3_close(impl_->db);
    throw Error(ErrorCode::kStorageError, "cannot open session store: " + msg);
  }
  sqlite3_busy_timeout(impl_->db, 5000);
  Exec(impl_->db, kSchema);
}

SqliteStore::~SqliteStore() { sqlite3_close(impl_->db); }

std::string SqliteStore::NextId() {
  std::lock_guard lock(impl_->mu);
  Exec(impl_->db, "BEGIN IMMEDIATE");
  try {
    Statement get(impl_->db, "SELECT value FROM meta WHERE key = 'next_session'");
    get.Step();
    const long long n = get.Int(0);
    Statement put(impl_->db, "UPDATE meta SET value = ? WHERE key = 'next_session'");
    put.Bind(1, n + 1).Step();
    Exec(impl_->db, "COMMIT");
    return "sess-" + std::to_string(n);
  } catch (...) {
    Exec(impl_->db, "ROLLBACK");
    throw;
  }
}

void SqliteStore::Save(const SessionState& state) {
  std::lock_guard lock(impl_->mu);
  const std::string snapshot = DumpJson(SessionToJson(state));
  Exec(impl_->db, "BEGIN IMMEDIATE");
  try {
    Statement up(impl_->db,
                 "INSERT INTO sessions (id, task, snapshot) VALUES (?, ?, ?) "
                 "ON CONFLICT(id) DO UPDATE SET snapshot = excluded.snapshot");
    up.Bind(1, state.id).Bind(2, std::string(TaskKindName(state.task))).Bind(3, snapshot).Step();
    // History is append-only: existing rows are never rewritten.
    for (const auto& e : state.history) {
      Statement ins(impl_->db,
                    "INSERT OR IGNORE INTO events (session_id, idx, type, payload) VALUES (?, ?, ?, ?)");
      ins.Bind(1, state.id).Bind(2, static_cast<long long>(e.index)).Bind(3, e.type).Bind(4, e.payload.dump());
      ins.Step();
    }
    Exec(impl_->db, "COMMIT");
  } catch (...) {
    Exec(impl_->db, "ROLLBACK");
    throw;
  }
}

std::optional<SessionState> SqliteStore::Load(const std::string& id) {
  std::lock_guard lock(impl_->mu);
  Statement q(impl_->db, "SELECT snapshot FROM sessions WHERE id = ?");
  q.Bind(1, id);
  if (!q.Step()) return std::nullopt;
  return SessionFromJson(ParseJson(q.Text(0)));
}

std::vector<SessionEvent> SqliteStore::Events(const std::string& id) {
  std::lock_guard lock(impl_->mu);
  Statement q(impl_->db, "SELECT idx, type, payload FROM events WHERE session_id = ? ORDER BY idx");
  q.Bind(1, id);
  std::vector<SessionEvent> out;
  while (q.Step()) {
    out.push_back({static_cast<std::size_t>(q.Int(0)), q.Text(1), Json::parse(q.Text(2))});
  }
  return out;
}

}  // namespace prefopt
