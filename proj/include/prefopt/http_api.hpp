#pragma once

// JSON-over-HTTP front end for the session loop.
//
//   POST /sessions                   {"task": "trip" | "meal"}
//   GET  /sessions/{id}
//   POST /sessions/{id}/enumerate    {"preference", "backends", "image"?}
//   POST /sessions/{id}/select       {"ids": [...]}
//   POST /sessions/{id}/optimize     {"preference", "budget_min" | "limit_kcal", "image"?}
//   GET  /sessions/{id}/plan
//
// "image" is {"mime": ..., "base64": ...}. Errors are problem-detail
// objects {type, title, status, detail, code}.

#include <string>

#include "prefopt/error.hpp"
#include "prefopt/session.hpp"

namespace httplib {
class Server;
}

namespace prefopt {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

int HttpStatusFor(ErrorCode code);
Json ProblemDetail(ErrorCode code, const std::string& detail);

// Routes one request without any socket; the server adapter and the tests
// both go through here.
ApiResponse HandleRequest(SessionService& service, const std::string& method,
                          const std::string& path, const std::string& body);

void RegisterRoutes(httplib::Server& server, SessionService& service);

// Blocks until the server stops. Throws kInvalidInput if binding fails.
void Serve(SessionService& service, const std::string& host, int port);

}  // namespace prefopt
