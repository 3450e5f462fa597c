#pragma once

// Runtime configuration: one JSON file covering the service, the backends,
// the provider and the solvers. Relative paths resolve against the file's
// directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prefopt/llm.hpp"
#include "prefopt/session.hpp"

namespace prefopt {

struct AppConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store;  // empty: in-memory sessions

  ProviderConfig provider;

  std::vector<HttpBackendConfig> backends;
  // When set, backends are mocks answering from this fixture directory.
  std::optional<std::filesystem::path> fixtures;
  std::vector<std::string> mock_backend_names{"llm-1", "llm-2"};
  int retries = kDefaultParseRetries;
  double temperature = kDefaultTemperature;

  SolverConfig solver;
  KnapsackConfig knapsack;
};

// Bundled data directory: $PREFOPT_DATA_DIR, else the build-time default.
std::filesystem::path DataDir();

AppConfig DefaultConfig();
// Throws kInvalidInput for unreadable files, unknown keys or bad values.
AppConfig LoadConfig(const std::filesystem::path& file);
AppConfig ConfigFromJson(const nlohmann::json& j, const std::filesystem::path& base_dir);

SessionDeps BuildDeps(const AppConfig& config);

}  // namespace prefopt
