// prefopt: command-line front end.
//
// Exit codes: 0 ok, 2 input error, 3 capability error (instance too large,
// time limit), 4 backend error (language model, maps API, storage).

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "prefopt/config.hpp"
#include "prefopt/eval.hpp"
#include "prefopt/http_api.hpp"
#include "prefopt/instance_io.hpp"
#include "prefopt/knapsack.hpp"
#include "prefopt/op_solver.hpp"
#include "prefopt/report.hpp"

namespace {

using namespace prefopt;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInstanceTooLarge:
    case ErrorCode::kTimeLimitExceeded: return 3;
    case ErrorCode::kParseFailure:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kAllBackendsFailed:
    case ErrorCode::kApiUnavailable:
    case ErrorCode::kBackendError:
    case ErrorCode::kStorageError: return 4;
    default: return 2;
  }
}

struct Globals {
  std::string config;
  std::string provider;
  std::string mock_llm;
  std::uint64_t seed = 1;
};

AppConfig ResolveConfig(const Globals& g) {
  AppConfig c = g.config.empty() ? DefaultConfig() : LoadConfig(g.config);
  if (!g.provider.empty()) c.provider.mode = g.provider == "live" ? ProviderMode::kLive : ProviderMode::kOffline;
  if (!g.mock_llm.empty()) c.fixtures = g.mock_llm;
  return c;
}

int CmdSolve(const std::string& file, const std::string& method_name, const std::string& out,
             long long time_limit_ms, bool json_only) {
  const OpInstance inst = LoadOpInstance(file);
  SolverConfig config;
  const auto method = ParseSolveMethod(method_name);
  if (!method) throw Error(ErrorCode::kInvalidInput, "unknown method " + method_name);
  config.method = *method;
  if (time_limit_ms > 0) config.time_limit = std::chrono::milliseconds(time_limit_ms);
  if (auto v = ValidateInstance(inst); !v.empty()) {
    throw Error(ErrorCode::kInvalidInput, "invalid instance: " + v.front());
  }
  const Itinerary it = Solve(ReduceInstance(inst), config);
  const std::string json = DumpJson(ItineraryToJson(it));
  if (!out.empty()) WriteFile(out, json);
  if (json_only) {
    std::cout << json;
  } else {
    std::cout << FormatItinerary(inst, it);
    if (it.status == SolveStatus::kTimeLimit) std::cout << "Time limit reached; the plan may not be optimal.\n";
  }
  return 0;
}

int CmdKnapsack(const std::string& file, const std::string& method, double granularity, const std::string& out,
                bool json_only) {
  const MealInstance meal = LoadMealInstance(file);
  KnapsackConfig config;
  config.calorie_granularity = granularity;
  if (method == "dp") {
    config.method = KnapsackMethod::kDp;
  } else if (method == "brute_force") {
    config.method = KnapsackMethod::kBruteForce;
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown knapsack method " + method);
  }
  const MealPlan plan = PlanMeal(meal, config);
  const std::string json = DumpJson(MealPlanToJson(plan));
  if (!out.empty()) WriteFile(out, json);
  std::cout << (json_only ? json : FormatMealPlan(meal, plan));
  return 0;
}

int CmdGen(std::uint64_t seed, std::size_t count, std::size_t n_spots, double policy, const std::string& out) {
  std::filesystem::create_directories(out);
  for (std::size_t k = 0; k < count; ++k) {
    GenOptions o;
    o.seed = seed + k;
    o.n_spots = n_spots;
    o.budget_policy = policy;
    char name[64];
    std::snprintf(name, sizeof name, "gen-%06llu.json", static_cast<unsigned long long>(o.seed));
    SaveOpInstance(std::filesystem::path(out) / name, GenerateInstance(o));
    std::cout << (std::filesystem::path(out) / name).string() << "\n";
  }
  return 0;
}

int CmdEval(const Globals& g, const std::string& dir, const std::vector<std::string>& solvers,
            const std::string& out, std::size_t threads) {
  std::shared_ptr<LlmBackend> baseline;
  if (std::find(solvers.begin(), solvers.end(), kBaselineSolver) != solvers.end()) {
    const AppConfig config = ResolveConfig(g);
    SessionDeps deps = BuildDeps(config);
    if (deps.backends.empty()) {
      throw Error(ErrorCode::kInvalidInput, "llm_op_baseline needs --mock-llm or configured backends");
    }
    baseline = deps.backends.front();
  }
  const EvalReport report = RunEval(dir, solvers, baseline.get(), threads);
  if (!out.empty()) WriteEvalOutputs(report, out);
  std::cout << EvalTable(report);
  return 0;
}

int CmdServe(const Globals& g, const std::string& host, int port, const std::string& store_path) {
  AppConfig config = ResolveConfig(g);
  if (!host.empty()) config.host = host;
  if (port > 0) config.port = port;
  if (!store_path.empty()) config.store = store_path;
  std::shared_ptr<SessionStore> store;
  if (config.store.empty()) {
    store = std::make_shared<MemoryStore>();
  } else {
    store = std::make_shared<SqliteStore>(config.store);
  }
  SessionService service(store, BuildDeps(config));
  std::cerr << "listening on " << config.host << ":" << config.port << "\n";
  Serve(service, config.host, config.port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-driven trip and meal planning with exact solvers"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--provider", g.provider, "Travel-time provider")->check(CLI::IsMember({"offline", "live"}));
  app.add_option("--mock-llm", g.mock_llm, "Answer model requests from this fixture directory");
  app.add_option("--seed", g.seed, "Seed for generated instances");

  auto* solve = app.add_subcommand("solve", "Solve a lappi-op/1 instance");
  std::string solve_file, method = "subset_dp", solve_out;
  long long time_limit_ms = 0;
  bool solve_json = false;
  solve->add_option("instance", solve_file, "Instance file")->required();
  solve->add_option("--method", method, "subset_dp, lazy_dfj or brute_force");
  solve->add_option("--out", solve_out, "Write the itinerary JSON here");
  solve->add_option("--time-limit-ms", time_limit_ms, "lazy_dfj time limit");
  solve->add_flag("--json", solve_json, "Print JSON instead of the plan text");

  auto* eval = app.add_subcommand("eval", "Evaluate solvers over a directory of instances");
  std::string eval_dir, eval_out;
  std::vector<std::string> solvers{"subset_dp"};
  std::size_t threads = 0;
  eval->add_option("instances", eval_dir, "Directory of lappi-op/1 files")->required();
  eval->add_option("--solvers", solvers, "Comma-separated solvers")->delimiter(',');
  eval->add_option("--out", eval_out, "Directory for metrics.csv and itineraries");
  eval->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* gen = app.add_subcommand("gen", "Generate synthetic instances");
  std::size_t gen_count = 1, gen_spots = 8;
  double policy = 0.5;
  std::string gen_out = ".";
  gen->add_option("--count", gen_count, "Number of instances (seeds seed, seed+1, ...)");
  gen->add_option("--n-spots", gen_spots, "Spots besides the depot");
  gen->add_option("--budget-policy", policy, "Budget as a fraction of stays plus a nearest-neighbour tour");
  gen->add_option("--out", gen_out, "Output directory");

  auto* knap = app.add_subcommand("knapsack", "Plan a lappi-meal/1 instance");
  std::string knap_file, knap_method = "dp", knap_out;
  double granularity = 1.0;
  bool knap_json = false;
  knap->add_option("instance", knap_file, "Meal instance file")->required();
  knap->add_option("--method", knap_method, "dp or brute_force");
  knap->add_option("--granularity", granularity, "kcal per DP cell");
  knap->add_option("--out", knap_out, "Write the plan JSON here");
  knap->add_flag("--json", knap_json, "Print JSON instead of the plan text");

  auto* serve = app.add_subcommand("serve", "Run the session HTTP API");
  std::string host, store_path;
  int port = 0;
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--store", store_path, "SQLite session store (default: in memory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve) return CmdSolve(solve_file, method, solve_out, time_limit_ms, solve_json);
    if (*knap) return CmdKnapsack(knap_file, knap_method, granularity, knap_out, knap_json);
    if (*gen) {
      if (gen_spots == 0) throw Error(ErrorCode::kPrecondition, "--n-spots must be at least 1");
      return CmdGen(g.seed, gen_count, gen_spots, policy, gen_out);
    }
    if (*eval) return CmdEval(g, eval_dir, solvers, eval_out, threads);
    if (*serve) return CmdServe(g, host, port, store_path);
  } catch (const Error& e) {
    std::cerr << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [invalid_input]: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [invalid_input]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
