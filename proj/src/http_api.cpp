#include "prefopt/http_api.hpp"

#include <regex>

#include "httplib.h"
#include "prefopt/report.hpp"

namespace prefopt {
namespace {

ApiResponse JsonResponse(int status, const Json& j) { return {status, "application/json", DumpJson(j)}; }

ApiResponse Problem(ErrorCode code, const std::string& detail) {
  return {HttpStatusFor(code), "application/problem+json", DumpJson(ProblemDetail(code, detail))};
}

std::vector<Attachment> ImageFrom(const Json& body) {
  if (!body.contains("image") || body["image"].is_null()) return {};
  const Json& img = body["image"];
  return {{img.at("mime").get<std::string>(), Base64Decode(img.at("base64").get<std::string>())}};
}

Json PlanJson(const SessionState& s) {
  if (s.task == TaskKind::kTrip) {
    if (!s.last_solution || !s.last_instance) throw Error(ErrorCode::kNotFound, "session has no plan yet");
    return {{"session_id", s.id},
            {"task", "trip"},
            {"budget_min", s.last_instance->budget_minutes},
            {"itinerary", ItineraryToJson(*s.last_solution)},
            {"text", FormatItinerary(*s.last_instance, *s.last_solution)}};
  }
  if (!s.last_plan || !s.last_meal) throw Error(ErrorCode::kNotFound, "session has no plan yet");
  return {{"session_id", s.id},
          {"task", "meal"},
          {"limit_kcal", s.last_meal->calorie_limit},
          {"meal", MealInstanceToJson(*s.last_meal)},
          {"plan", MealPlanToJson(*s.last_plan)},
          {"note", s.last_note},
          {"text", FormatMealPlan(*s.last_meal, *s.last_plan)}};
}

ApiResponse Route(SessionService& service, const std::string& method, const std::string& path,
                  const std::string& body_text) {
  static const std::regex kSession(R"(^/sessions/([A-Za-z0-9_-]+)(/(enumerate|select|optimize|plan))?/?$)");
  auto body = [&] {
    if (body_text.empty()) return Json::object();
    Json j = ParseJson(body_text);
    if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, "request body must be a JSON object");
    return j;
  };

  if (path == "/sessions" || path == "/sessions/") {
    if (method != "POST") return Problem(ErrorCode::kNotFound, "use POST /sessions");
    const Json b = body();
    const auto task = ParseTaskKind(b.value("task", "trip"));
    if (!task) throw Error(ErrorCode::kInvalidInput, "task must be 'trip' or 'meal'");
    return JsonResponse(201, SessionToJson(service.Create(*task)));
  }

  std::smatch m;
  if (!std::regex_match(path, m, kSession)) return Problem(ErrorCode::kNotFound, "no route " + path);
  const std::string id = m[1];
  const std::string action = m[3];

  if (action.empty() || action == "plan") {
    if (method != "GET") return Problem(ErrorCode::kNotFound, "use GET " + path);
    const SessionState s = service.Get(id);
    return JsonResponse(200, action.empty() ? SessionToJson(s) : PlanJson(s));
  }
  if (method != "POST") return Problem(ErrorCode::kNotFound, "use POST " + path);
  const Json b = body();
  if (action == "enumerate") {
    const std::string pref = b.at("preference").get<std::string>();
    const std::size_t count = b.value("backends", std::size_t{1});
    return JsonResponse(200, SessionToJson(service.Enumerate(id, pref, count, ImageFrom(b))));
  }
  if (action == "select") {
    return JsonResponse(200, SessionToJson(service.Select(id, b.at("ids").get<std::vector<std::string>>())));
  }
  // optimize
  const std::string pref = b.value("preference", "");
  double budget = 0.0;
  if (b.contains("budget_min")) {
    budget = b["budget_min"].get<double>();
  } else if (b.contains("limit_kcal")) {
    budget = b["limit_kcal"].get<double>();
  } else {
    throw Error(ErrorCode::kInvalidInput, "optimize needs budget_min or limit_kcal");
  }
  return JsonResponse(200, SessionToJson(service.Optimize(id, pref, budget, ImageFrom(b))));
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kPrecondition:
    case ErrorCode::kUnknownCandidateId:
    case ErrorCode::kUnknownSpotId:
    case ErrorCode::kMissingBinding:
    case ErrorCode::kEmptyInstance:
    case ErrorCode::kInstanceTooLarge: return 422;
    case ErrorCode::kParseFailure:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kAllBackendsFailed:
    case ErrorCode::kBackendError: return 502;
    case ErrorCode::kApiUnavailable: return 503;
    case ErrorCode::kTimeLimitExceeded: return 504;
    case ErrorCode::kStorageError: return 500;
  }
  return 500;
}

Json ProblemDetail(ErrorCode code, const std::string& detail) {
  const std::string name(ErrorCodeName(code));
  const int status = HttpStatusFor(code);
  return {{"type", "urn:prefopt:error:" + name},
          {"title", httplib::status_message(status)},
          {"status", status},
          {"detail", detail},
          {"code", name}};
}

ApiResponse HandleRequest(SessionService& service, const std::string& method, const std::string& path,
                          const std::string& body) {
  try {
    return Route(service, method, path, body);
  } catch (const Error& e) {
    return Problem(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return Problem(ErrorCode::kInvalidInput, std::string("bad request body: ") + e.what());
  }
}

void RegisterRoutes(httplib::Server& server, SessionService& service) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = HandleRequest(service, req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/sessions.*)", handler);
  server.Post(R"(/sessions.*)", handler);
}

void Serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  RegisterRoutes(server, service);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kInvalidInput, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace prefopt
