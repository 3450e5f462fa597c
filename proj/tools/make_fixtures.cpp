// Regenerates the bundled evaluation data:
//   <data>/eval/gen-*.json             24 synthetic instances
//   <data>/fixtures/baseline-fault.json canned baseline routes keyed by request digest
//   <data>/examples/berlin6.json       six-stop example trip
//
// Baseline routes are deliberately poor: most drop the highest-scoring stop
// of the optimal tour; every sixth instance gets the slowest ordering of the
// optimal stops when that ordering breaks the budget.

#include <algorithm>
#include <iostream>

#include "prefopt/config.hpp"
#include "prefopt/eval.hpp"
#include "prefopt/instance_io.hpp"
#include "prefopt/instantiation.hpp"
#include "prefopt/op_solver.hpp"

using namespace prefopt;

namespace {

constexpr std::size_t kInstances = 24;
constexpr std::size_t kSpots = 8;
constexpr double kPolicy = 0.5;

std::vector<int> FaultRoute(const OpInstance& inst, std::size_t ordinal) {
  const Itinerary best = SolveSubsetDp(inst);
  std::vector<int> stops;
  for (const auto& id : VisitOrder(best)) stops.push_back(static_cast<int>(*inst.IndexOf(id)));

  if (ordinal % 6 == 5 && stops.size() >= 2) {
    std::vector<int> perm = stops, worst = stops;
    std::sort(perm.begin(), perm.end());
    double worst_total = -1.0;
    do {
      std::vector<SpotId> route;
      for (int k : perm) route.push_back(inst.spots[k].id);
      const double total = EvaluateRoute(inst, route).total_minutes;
      if (total > worst_total) {
        worst_total = total;
        worst = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (worst_total > inst.budget_minutes) return worst;
  }
  if (!stops.empty()) {
    auto top = std::max_element(stops.begin(), stops.end(),
                                [&](int a, int b) { return inst.score[a] < inst.score[b]; });
    stops.erase(top);
  }
  return stops;
}

OpInstance Berlin6() {
  struct Row {
    const char* id;
    const char* name;
    const char* address;
    double lat, lon, score, hours;
  };
  const Row rows[] = {
      {"hbf", "Berlin Hauptbahnhof", "Europaplatz 1, 10557 Berlin", 52.5251, 13.3694, 0, 0},
      {"brandenburg-gate", "Brandenburg Gate", "Pariser Platz, 10117 Berlin", 52.5163, 13.3777, 8, 0.75},
      {"checkpoint-charlie", "Checkpoint Charlie", "Friedrichstraße 43-45, 10117 Berlin", 52.5075, 13.3904, 9, 1.0},
      {"east-side-gallery", "East Side Gallery", "Mühlenstraße 3-100, 10243 Berlin", 52.5050, 13.4396, 6, 1.5},
      {"museum-island", "Museum Island", "Bodestraße, 10178 Berlin", 52.5169, 13.4019, 9, 3.0},
      {"berlin-cathedral", "Berlin Cathedral", "Am Lustgarten, 10178 Berlin", 52.5191, 13.4010, 5, 1.0},
      {"berlin-wall-memorial", "Berlin Wall Memorial", "Bernauer Straße 111, 13355 Berlin", 52.5351, 13.3903, 10, 2.0},
  };
  OpInstance inst;
  for (const auto& r : rows) {
    Spot s;
    s.id = r.id;
    s.name = r.name;
    s.address = r.address;
    s.lat = r.lat;
    s.lon = r.lon;
    inst.spots.push_back(s);
    inst.score.push_back(r.score);
    inst.duration.push_back(r.hours * 60.0);
  }
  inst.travel_time = HaversineMatrix(inst.spots);
  inst.budget_minutes = 480.0;
  return inst;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path data = argc > 1 ? std::filesystem::path(argv[1]) : DataDir();
  std::filesystem::create_directories(data / "eval");
  std::filesystem::create_directories(data / "fixtures");
  std::filesystem::create_directories(data / "examples");

  Json responses = Json::array();
  for (std::size_t k = 0; k < kInstances; ++k) {
    GenOptions o;
    o.seed = k + 1;
    o.n_spots = kSpots;
    o.budget_policy = kPolicy;
    const OpInstance inst = GenerateInstance(o);
    char name[64];
    std::snprintf(name, sizeof name, "gen-%06llu.json", static_cast<unsigned long long>(o.seed));
    SaveOpInstance(data / "eval" / name, inst);

    Json route = Json::array({0});
    for (int s : FaultRoute(inst, k)) route.push_back(s);
    route.push_back(0);
    responses.push_back({{"kind", TemplateKindName(TemplateKind::kOpBaseline)},
                         {"backend", "*"},
                         {"digest", RequestDigest(BaselineRequest(inst))},
                         {"note", name},
                         {"text", Json({{"route", route}}).dump()}});
  }
  WriteFile(data / "fixtures" / "baseline-fault.json", DumpJson(Json{{"responses", responses}}));
  SaveOpInstance(data / "examples" / "berlin6.json", Berlin6());
  std::cout << "wrote " << kInstances << " instances and baseline fixtures under " << data.string() << "\n";
  return 0;
}
