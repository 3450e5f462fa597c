#include "prefopt/config.hpp"

#include <cstdlib>
#include <set>

#include "prefopt/error.hpp"
#include "prefopt/instance_io.hpp"

#ifndef PREFOPT_DEFAULT_DATA_DIR
#define PREFOPT_DEFAULT_DATA_DIR "data"
#endif

namespace prefopt {
namespace {

void CheckKeys(const nlohmann::json& j, const char* where, std::set<std::string> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::kInvalidInput, std::string("unknown key '") + key + "' in " + where);
    }
  }
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::filesystem::path DataDir() {
  if (const char* env = std::getenv("PREFOPT_DATA_DIR"); env && *env) return env;
  return PREFOPT_DEFAULT_DATA_DIR;
}

AppConfig DefaultConfig() {
  AppConfig c;
  c.provider.gazetteer = DataDir() / "gazetteer.json";
  return c;
}

AppConfig ConfigFromJson(const nlohmann::json& j, const std::filesystem::path& base) {
  AppConfig c = DefaultConfig();
  try {
    CheckKeys(j, "config", {"listen", "store", "provider", "llm", "solver", "knapsack"});
    if (j.contains("listen")) {
      const auto& l = j["listen"];
      CheckKeys(l, "listen", {"host", "port"});
      c.host = l.value("host", c.host);
      c.port = l.value("port", c.port);
    }
    if (j.contains("store")) c.store = Resolve(base, j["store"].get<std::string>());
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      CheckKeys(p, "provider", {"mode", "walking_speed_kmh", "gazetteer", "cache_dir", "geocode_endpoint",
                                "matrix_endpoint", "api_key_env", "travel_mode", "max_in_flight"});
      const std::string mode = p.value("mode", "offline");
      if (mode != "offline" && mode != "live") {
        throw Error(ErrorCode::kInvalidInput, "provider mode must be offline or live");
      }
      c.provider.mode = mode == "live" ? ProviderMode::kLive : ProviderMode::kOffline;
      c.provider.walking_speed_kmh = p.value("walking_speed_kmh", c.provider.walking_speed_kmh);
      if (p.contains("gazetteer")) c.provider.gazetteer = Resolve(base, p["gazetteer"].get<std::string>());
      if (p.contains("cache_dir")) c.provider.cache_dir = Resolve(base, p["cache_dir"].get<std::string>());
      c.provider.geocode_endpoint = p.value("geocode_endpoint", c.provider.geocode_endpoint);
      c.provider.matrix_endpoint = p.value("matrix_endpoint", c.provider.matrix_endpoint);
      c.provider.api_key_env = p.value("api_key_env", c.provider.api_key_env);
      c.provider.travel_mode = p.value("travel_mode", c.provider.travel_mode);
      c.provider.max_in_flight = p.value("max_in_flight", c.provider.max_in_flight);
    }
    if (j.contains("llm")) {
      const auto& l = j["llm"];
      CheckKeys(l, "llm", {"retries", "temperature", "backends", "fixtures", "mock_backends"});
      c.retries = l.value("retries", c.retries);
      c.temperature = l.value("temperature", c.temperature);
      if (l.contains("fixtures")) c.fixtures = Resolve(base, l["fixtures"].get<std::string>());
      if (l.contains("mock_backends")) c.mock_backend_names = l["mock_backends"].get<std::vector<std::string>>();
      for (const auto& b : l.value("backends", nlohmann::json::array())) {
        CheckKeys(b, "backend", {"name", "endpoint", "model", "api_key_env", "temperature", "timeout_s"});
        HttpBackendConfig hb;
        hb.name = b.value("name", "llm-" + std::to_string(c.backends.size() + 1));
        hb.endpoint = b.at("endpoint").get<std::string>();
        hb.model = b.value("model", hb.model);
        hb.api_key_env = b.value("api_key_env", hb.api_key_env);
        if (b.contains("temperature")) hb.temperature = b["temperature"].get<double>();
        hb.timeout = std::chrono::seconds(b.value("timeout_s", 120));
        c.backends.push_back(std::move(hb));
      }
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      CheckKeys(s, "solver", {"method", "max_spots", "time_limit_ms"});
      if (s.contains("method")) {
        auto m = ParseSolveMethod(s["method"].get<std::string>());
        if (!m) throw Error(ErrorCode::kInvalidInput, "unknown solver method");
        c.solver.method = *m;
      }
      if (s.contains("max_spots")) c.solver.max_spots = s["max_spots"].get<std::size_t>();
      if (s.contains("time_limit_ms")) {
        c.solver.time_limit = std::chrono::milliseconds(s["time_limit_ms"].get<long long>());
      }
    }
    if (j.contains("knapsack")) {
      const auto& k = j["knapsack"];
      CheckKeys(k, "knapsack", {"granularity"});
      c.knapsack.calorie_granularity = k.value("granularity", 1.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("bad config: ") + e.what());
  }
  if (c.retries < 0) throw Error(ErrorCode::kInvalidInput, "retries must be >= 0");
  return c;
}

AppConfig LoadConfig(const std::filesystem::path& file) {
  const auto j = nlohmann::json::parse(ReadFile(file), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kInvalidInput, "config is not valid JSON: " + file.string());
  return ConfigFromJson(j, file.parent_path());
}

SessionDeps BuildDeps(const AppConfig& config) {
  SessionDeps deps;
  if (config.fixtures) {
    auto store = std::make_shared<const FixtureStore>(FixtureStore::LoadDirectory(*config.fixtures));
    for (const auto& name : config.mock_backend_names) {
      deps.backends.push_back(std::make_shared<MockBackend>(name, store));
    }
  } else {
    for (const auto& b : config.backends) deps.backends.push_back(std::make_shared<HttpChatBackend>(b));
  }
  deps.provider = MakeProvider(config.provider);
  deps.solver = config.solver;
  deps.knapsack = config.knapsack;
  deps.llm.retries = config.retries;
  deps.llm.temperature = config.temperature;
  return deps;
}

}  // namespace prefopt
