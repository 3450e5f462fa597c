#include "prefopt/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "prefopt/error.hpp"

namespace prefopt {
namespace {

[[noreturn]] void Bad(const std::string& what) { throw Error(ErrorCode::kInvalidInput, what); }

const Json& Field(const Json& j, const char* key) {
  if (!j.is_object()) Bad(std::string("expected object while reading '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) Bad(std::string("missing field '") + key + "'");
  return *it;
}

double Number(const Json& j, const char* key) {
  const Json& v = Field(j, key);
  if (!v.is_number()) Bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string Text(const Json& j, const char* key) {
  const Json& v = Field(j, key);
  if (!v.is_string()) Bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string OptionalText(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) Bad(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

const Json& Array(const Json& j, const char* key) {
  const Json& v = Field(j, key);
  if (!v.is_array()) Bad(std::string("field '") + key + "' must be an array");
  return v;
}

void CheckFormat(const Json& j, const char* expected) {
  const std::string got = Text(j, "format");
  if (got != expected) Bad("unsupported format '" + got + "', expected '" + expected + "'");
}

}  // namespace

Json SpotToJson(const Spot& s) {
  Json j;
  j["id"] = s.id;
  j["name"] = s.name;
  j["address"] = s.address;
  j["lat"] = s.lat;
  j["lon"] = s.lon;
  if (!s.reason.empty()) j["reason"] = s.reason;
  if (!s.sources.empty()) j["sources"] = s.sources;
  return j;
}

Spot SpotFromJson(const Json& j) {
  Spot s;
  s.id = Text(j, "id");
  s.name = OptionalText(j, "name");
  s.address = OptionalText(j, "address");
  s.lat = Number(j, "lat");
  s.lon = Number(j, "lon");
  s.reason = OptionalText(j, "reason");
  if (auto it = j.find("sources"); it != j.end()) {
    for (const auto& src : *it) s.sources.insert(src.get<std::string>());
  }
  return s;
}

Json OpInstanceToJson(const OpInstance& inst) {
  Json j;
  j["format"] = kOpFormat;
  Json spots = Json::array();
  for (std::size_t i = 0; i < inst.size(); ++i) {
    Json s = SpotToJson(inst.spots[i]);
    s["score"] = inst.score.at(i);
    s["duration_min"] = inst.duration.at(i);
    spots.push_back(std::move(s));
  }
  j["spots"] = std::move(spots);
  j["depot_id"] = inst.spots.empty() ? std::string() : inst.depot_id();
  Json matrix = Json::array();
  for (std::size_t r = 0; r < inst.travel_time.size(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < inst.travel_time.size(); ++c) row.push_back(inst.travel_time(r, c));
    matrix.push_back(std::move(row));
  }
  j["travel_time_min"] = std::move(matrix);
  j["budget_min"] = inst.budget_minutes;
  j["lambda_v"] = inst.lambda_v;
  j["lambda_t"] = inst.lambda_t;
  return j;
}

OpInstance OpInstanceFromJson(const Json& j) {
  CheckFormat(j, kOpFormat);
  OpInstance inst;
  for (const auto& s : Array(j, "spots")) {
    inst.spots.push_back(SpotFromJson(s));
    inst.score.push_back(Number(s, "score"));
    inst.duration.push_back(Number(s, "duration_min"));
  }
  const std::string depot = Text(j, "depot_id");
  auto di = inst.IndexOf(depot);
  if (!di) Bad("depot_id '" + depot + "' does not name a spot");
  inst.depot_index = *di;

  const Json& rows = Array(j, "travel_time_min");
  const std::size_t n = inst.spots.size();
  if (rows.size() != n) Bad("travel_time_min must have one row per spot");
  std::vector<double> data;
  data.reserve(n * n);
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != n) Bad("travel_time_min must be square");
    for (const auto& v : row) {
      if (!v.is_number()) Bad("travel_time_min entries must be numbers");
      data.push_back(v.get<double>());
    }
  }
  inst.travel_time = TimeMatrix(n, std::move(data));
  inst.budget_minutes = Number(j, "budget_min");
  inst.lambda_v = j.contains("lambda_v") ? Number(j, "lambda_v") : kDefaultLambdaV;
  inst.lambda_t = j.contains("lambda_t") ? Number(j, "lambda_t") : kDefaultLambdaT;
  return inst;
}

Json MealInstanceToJson(const MealInstance& m) {
  Json j;
  j["format"] = kMealFormat;
  j["recipe"] = m.recipe_title;
  Json must = Json::array();
  for (const auto& i : m.must_have) {
    must.push_back(Json{{"name", i.name}, {"qty", i.quantity}, {"unit", i.unit}, {"kcal", i.kcal}});
  }
  j["must_have"] = std::move(must);
  Json opt = Json::array();
  for (const auto& i : m.optional) {
    opt.push_back(Json{{"name", i.name}, {"priority", i.priority}, {"kcal", i.kcal}});
  }
  j["optional"] = std::move(opt);
  j["limit_kcal"] = m.calorie_limit;
  return j;
}

MealInstance MealInstanceFromJson(const Json& j) {
  CheckFormat(j, kMealFormat);
  MealInstance m;
  m.recipe_title = Text(j, "recipe");
  for (const auto& i : Array(j, "must_have")) {
    m.must_have.push_back({Text(i, "name"), Number(i, "qty"), OptionalText(i, "unit"),
                           Number(i, "kcal")});
  }
  for (const auto& i : Array(j, "optional")) {
    m.optional.push_back({Text(i, "name"), Number(i, "priority"), Number(i, "kcal")});
  }
  m.calorie_limit = Number(j, "limit_kcal");
  return m;
}

Json ItineraryToJson(const Itinerary& it) {
  Json j;
  j["route"] = it.route;
  Json legs = Json::array();
  for (const auto& l : it.legs) legs.push_back(Json{{"from", l.from}, {"to", l.to}, {"minutes", l.minutes}});
  j["legs"] = std::move(legs);
  Json stays = Json::array();
  for (const auto& s : it.stays) stays.push_back(Json{{"spot", s.spot}, {"minutes", s.minutes}});
  j["stays"] = std::move(stays);
  j["total_min"] = it.total_minutes;
  j["total_reward"] = it.total_reward;
  j["objective"] = it.objective;
  j["status"] = SolveStatusName(it.status);
  return j;
}

Itinerary ItineraryFromJson(const Json& j) {
  Itinerary it;
  for (const auto& r : Array(j, "route")) it.route.push_back(r.get<std::string>());
  for (const auto& l : Array(j, "legs")) {
    it.legs.push_back({Text(l, "from"), Text(l, "to"), Number(l, "minutes")});
  }
  if (j.contains("stays")) {
    for (const auto& s : Array(j, "stays")) it.stays.push_back({Text(s, "spot"), Number(s, "minutes")});
  }
  it.total_minutes = Number(j, "total_min");
  it.total_reward = Number(j, "total_reward");
  it.objective = Number(j, "objective");
  auto st = ParseSolveStatus(Text(j, "status"));
  if (!st) Bad("unknown itinerary status");
  it.status = *st;
  return it;
}

Json MealPlanToJson(const MealPlan& p) {
  Json j;
  j["scale"] = p.scale_factor;
  j["selected"] = p.selected_optionals;
  Json must = Json::array();
  for (const auto& i : p.scaled_must_have) {
    must.push_back(Json{{"name", i.name}, {"qty", i.quantity}, {"unit", i.unit}, {"kcal", i.kcal}});
  }
  j["must_have"] = std::move(must);
  j["total_kcal"] = p.total_calories;
  j["total_priority"] = p.total_priority;
  return j;
}

MealPlan MealPlanFromJson(const Json& j) {
  MealPlan p;
  p.scale_factor = Number(j, "scale");
  for (const auto& s : Array(j, "selected")) p.selected_optionals.push_back(s.get<std::string>());
  if (j.contains("must_have")) {
    for (const auto& i : Array(j, "must_have")) {
      p.scaled_must_have.push_back({Text(i, "name"), Number(i, "qty"), OptionalText(i, "unit"),
                                    Number(i, "kcal")});
    }
  }
  p.total_calories = Number(j, "total_kcal");
  p.total_priority = Number(j, "total_priority");
  return p;
}

Json ParseJson(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Bad(std::string("malformed JSON: ") + e.what());
  }
}

std::string DumpJson(const Json& j) { return j.dump(2) + "\n"; }

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write " + path.string());
  out << content;
}

OpInstance LoadOpInstance(const std::filesystem::path& path) {
  return OpInstanceFromJson(ParseJson(ReadFile(path)));
}

void SaveOpInstance(const std::filesystem::path& path, const OpInstance& inst) {
  WriteFile(path, DumpJson(OpInstanceToJson(inst)));
}

MealInstance LoadMealInstance(const std::filesystem::path& path) {
  return MealInstanceFromJson(ParseJson(ReadFile(path)));
}

void SaveMealInstance(const std::filesystem::path& path, const MealInstance& m) {
  WriteFile(path, DumpJson(MealInstanceToJson(m)));
}

}  // namespace prefopt
