#include "prefopt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>
#include <random>
#include <thread>

#include "prefopt/error.hpp"
#include "prefopt/instance_io.hpp"
#include "prefopt/instantiation.hpp"
#include "prefopt/op_solver.hpp"

namespace prefopt {
namespace {

// Uniform in [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementations.
double Unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
double Uniform(std::mt19937_64& g, double lo, double hi) { return lo + (hi - lo) * Unit(g); }

std::string G17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string F2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

EvalRow RunOne(const std::string& name, const OpInstance& inst, const std::string& solver,
               LlmBackend* baseline) {
  EvalRow row;
  row.instance = name;
  row.solver = solver;
  row.budget_minutes = inst.budget_minutes;
  try {
    if (solver == kBaselineSolver) {
      if (!baseline) throw Error(ErrorCode::kPrecondition, "baseline solver needs a backend");
      row.itinerary = LlmOpBaseline(inst, *baseline);
    } else {
      const auto method = ParseSolveMethod(solver);
      if (!method) throw Error(ErrorCode::kInvalidInput, "unknown solver " + solver);
      SolverConfig config;
      config.method = *method;
      row.itinerary = Solve(ReduceInstance(inst), config);
    }
    row.metrics = ComputeMetrics(row.itinerary, inst.budget_minutes);
  } catch (const Error& e) {
    row.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
  }
  return row;
}

}  // namespace

double NearestNeighbourTourMinutes(const OpInstance& inst) {
  std::vector<bool> done(inst.size(), false);
  std::size_t cur = inst.depot_index;
  done[cur] = true;
  double total = 0.0;
  for (std::size_t step = 1; step < inst.size(); ++step) {
    std::size_t best = inst.size();
    for (std::size_t j = 0; j < inst.size(); ++j) {
      if (!done[j] && (best == inst.size() || inst.travel_time(cur, j) < inst.travel_time(cur, best))) best = j;
    }
    total += inst.travel_time(cur, best);
    done[best] = true;
    cur = best;
  }
  return total + inst.travel_time(cur, inst.depot_index);
}

OpInstance GenerateInstance(const GenOptions& o) {
  if (o.n_spots == 0) throw Error(ErrorCode::kPrecondition, "n_spots must be at least 1");
  if (!(o.budget_policy > 0.0)) throw Error(ErrorCode::kPrecondition, "budget policy must be positive");
  std::mt19937_64 g(o.seed);
  OpInstance inst;
  Spot depot;
  depot.id = "depot";
  depot.name = "Start";
  depot.lat = o.center.lat;
  depot.lon = o.center.lon;
  inst.spots.push_back(depot);
  inst.score.push_back(0.0);
  inst.duration.push_back(0.0);
  const double deg = 180.0 / std::numbers::pi;
  for (std::size_t i = 1; i <= o.n_spots; ++i) {
    const double r = o.radius_km * std::sqrt(Unit(g));
    const double theta = 2.0 * std::numbers::pi * Unit(g);
    Spot s;
    char id[16];
    std::snprintf(id, sizeof id, "p%02zu", i);
    s.id = id;
    s.name = "Spot " + std::to_string(i);
    s.lat = o.center.lat + r * std::sin(theta) / kEarthRadiusKm * deg;
    s.lon = o.center.lon + r * std::cos(theta) / (kEarthRadiusKm * std::cos(o.center.lat / deg)) * deg;
    inst.spots.push_back(s);
    inst.score.push_back(Uniform(g, 1.0, 10.0));
    inst.duration.push_back(Uniform(g, 20.0, 90.0));
  }
  inst.travel_time = HaversineMatrix(inst.spots, o.speed_kmh);
  double stays = 0.0;
  for (double d : inst.duration) stays += d;
  inst.budget_minutes = o.budget_policy * (stays + NearestNeighbourTourMinutes(inst));
  return inst;
}

std::pair<double, double> MeanSd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

SolverSummary Summarize(const std::string& solver, const std::vector<EvalRow>& rows) {
  SolverSummary s;
  s.solver = solver;
  std::vector<double> dev, reward, poi;
  for (const auto& r : rows) {
    if (r.solver != solver) continue;
    ++s.runs;
    if (!r.error.empty()) continue;
    ++s.solved;
    if (r.metrics.success) ++s.successes;
    dev.push_back(r.metrics.time_deviation_hours);
    reward.push_back(r.metrics.total_reward);
    poi.push_back(static_cast<double>(r.metrics.poi_count));
  }
  std::tie(s.deviation_mean, s.deviation_sd) = MeanSd(dev);
  std::tie(s.reward_mean, s.reward_sd) = MeanSd(reward);
  std::tie(s.poi_mean, s.poi_sd) = MeanSd(poi);
  return s;
}

EvalReport RunEval(const std::filesystem::path& dir, const std::vector<std::string>& solvers,
                   LlmBackend* baseline, std::size_t threads) {
  if (solvers.empty()) throw Error(ErrorCode::kInvalidInput, "no solver requested");
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kInvalidInput, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  EvalReport report;
  std::vector<std::pair<std::string, OpInstance>> instances;
  for (const auto& f : files) {
    try {
      instances.emplace_back(f.stem().string(), LoadOpInstance(f));
    } catch (const std::exception& e) {
      report.skipped.emplace_back(f.filename().string(), e.what());
    }
  }
  if (instances.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no readable instance in " + dir.string());
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::vector<EvalRow>> per_instance(instances.size());
  for (std::size_t start = 0; start < instances.size(); start += threads) {
    std::vector<std::future<std::vector<EvalRow>>> wave;
    for (std::size_t i = start; i < std::min(instances.size(), start + threads); ++i) {
      wave.push_back(std::async(std::launch::async, [&, i] {
        std::vector<EvalRow> rows;
        for (const auto& s : solvers) rows.push_back(RunOne(instances[i].first, instances[i].second, s, baseline));
        return rows;
      }));
    }
    for (std::size_t k = 0; k < wave.size(); ++k) per_instance[start + k] = wave[k].get();
  }
  for (auto& rows : per_instance) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  for (const auto& s : solvers) report.summaries.push_back(Summarize(s, report.rows));
  return report;
}

std::string EvalCsv(const EvalReport& report) {
  std::string out = "instance,solver,budget_min,total_min,deviation_h,success,total_reward,poi_count,status\n";
  for (const auto& r : report.rows) {
    out += r.instance + "," + r.solver + "," + G17(r.budget_minutes) + ",";
    if (!r.error.empty()) {
      out += ",,0,,,error\n";
      continue;
    }
    out += G17(r.itinerary.total_minutes) + "," + G17(r.metrics.time_deviation_hours) + "," +
           (r.metrics.success ? "1" : "0") + "," + G17(r.metrics.total_reward) + "," +
           std::to_string(r.metrics.poi_count) + "," + SolveStatusName(r.itinerary.status) + "\n";
  }
  return out;
}

std::string EvalTable(const EvalReport& report) {
  std::size_t width = 6;
  for (const auto& s : report.summaries) width = std::max(width, s.solver.size());
  // Pads by code points so the two-byte "±" does not skew columns.
  auto pad = [](std::string s, std::size_t w) {
    const auto glyphs = static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
    if (glyphs < w) s.append(w - glyphs, ' ');
    return s;
  };
  std::string out = pad("solver", width) + "  " + pad("time deviation (h)", 20) + pad("total reward", 18) +
                    pad("POIs", 16) + "success\n";
  for (const auto& s : report.summaries) {
    const double pct = s.runs ? 100.0 * static_cast<double>(s.successes) / static_cast<double>(s.runs) : 0.0;
    char success[64];
    std::snprintf(success, sizeof success, "%.0f%% (%zu/%zu)", pct, s.successes, s.runs);
    out += pad(s.solver, width) + "  " + pad(F2(s.deviation_mean) + " ± " + F2(s.deviation_sd), 20) +
           pad(F2(s.reward_mean) + " ± " + F2(s.reward_sd), 18) + pad(F2(s.poi_mean) + " ± " + F2(s.poi_sd), 16) +
           success + "\n";
  }
  for (const auto& [file, why] : report.skipped) out += "skipped " + file + ": " + why + "\n";
  for (const auto& r : report.rows) {
    if (!r.error.empty()) out += "failed " + r.instance + " (" + r.solver + "): " + r.error + "\n";
  }
  return out;
}

void WriteEvalOutputs(const EvalReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "itineraries");
  WriteFile(out_dir / "metrics.csv", EvalCsv(report));
  WriteFile(out_dir / "summary.txt", EvalTable(report));
  for (const auto& r : report.rows) {
    if (!r.error.empty()) continue;
    WriteFile(out_dir / "itineraries" / (r.instance + "." + r.solver + ".json"), DumpJson(ItineraryToJson(r.itinerary)));
  }
}

}  // namespace prefopt
