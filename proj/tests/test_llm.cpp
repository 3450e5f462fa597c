#include <httplib.h>

#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "prefopt/error.hpp"
#include "prefopt/llm.hpp"
#include "prefopt/prompts.hpp"

using namespace prefopt;

namespace {

LlmRequest Request(TemplateKind kind, std::string user) {
  LlmRequest r;
  r.kind = kind;
  r.schema = BuiltInTemplate(kind).output_schema;
  r.messages = {{"system", "sys"}, {"user", std::move(user)}};
  return r;
}

}  // namespace

TEST_SUITE("prompts") {
  TEST_CASE("every built-in template renders with its own slots bound") {
    for (auto kind : {TemplateKind::kTripEnumeration, TemplateKind::kTripValueAssignment,
                      TemplateKind::kMealEnumeration, TemplateKind::kMealValueAssignment,
                      TemplateKind::kOpBaseline}) {
      const auto& t = BuiltInTemplate(kind);
      Bindings b;
      for (const auto& slot : TemplateSlots(t.built_in_text)) b[slot] = "7";
      CHECK_FALSE(b.empty());
      const std::string text = RenderSystemPrompt(t, b);
      CHECK(text.find('{' + TemplateSlots(t.built_in_text)[0] + '}') == std::string::npos);
      CHECK(text.find(SchemaDescription(t.output_schema)) != std::string::npos);
      CHECK(RenderSystemPrompt(t, b) == text);
    }
  }

  TEST_CASE("missing bindings are named") {
    try {
      Render("Pick {count} of {kind}", {{"count", "3"}});
      FAIL("expected missing binding");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingBinding);
      CHECK(std::string(e.what()).find("{kind}") != std::string::npos);
    }
  }

  TEST_CASE("doubled braces are literal") {
    CHECK(TemplateSlots("a {{x}} {y}") == std::vector<std::string>{"y"});
    CHECK(Render("a {{x}} {y}", {{"y", "1"}}) == "a {x} 1");
  }

  TEST_CASE("slots are listed once in order of appearance") {
    CHECK(TemplateSlots(BuiltInTemplate(TemplateKind::kTripValueAssignment).built_in_text) ==
          std::vector<std::string>{"item_count"});
    CHECK(TemplateSlots("{b} {a} {b}") == std::vector<std::string>{"b", "a"});
  }

  TEST_CASE("value-assignment human prompt layout") {
    const std::vector<std::string> items{"Station", "Museum"};
    CHECK(ValueAssignmentHumanPrompt("I like art.", items) == "I like art.\n\n- Station\n- Museum\n");
  }

  TEST_CASE("unknown schema") { CHECK_THROWS_AS(SchemaDescription("nope/1"), Error); }
}

TEST_SUITE("llm") {
  TEST_CASE("digest is stable and sensitive to every message") {
    const auto a = Request(TemplateKind::kTripEnumeration, "Paris");
    auto b = a;
    CHECK(RequestDigest(a) == RequestDigest(b));
    CHECK(RequestDigest(a).size() == 16);
    b.messages[0].text = "sys2";
    CHECK(RequestDigest(a) != RequestDigest(b));
    b = a;
    b.kind = TemplateKind::kMealEnumeration;
    CHECK(RequestDigest(a) != RequestDigest(b));
  }

  TEST_CASE("mock backend answers deterministically and refuses unknown keys") {
    auto store = std::make_shared<FixtureStore>();
    store->Add({{"kind", "trip_enumeration"}, {"backend", "*"}, {"match", "Paris"}, {"text", "P"}});
    store->Add({{"kind", "trip_enumeration"}, {"backend", "llm-2"}, {"match", ""}, {"text", "ANY2"}});
    MockBackend one("llm-1", store), two("llm-2", store);
    const auto paris = Request(TemplateKind::kTripEnumeration, "art in Paris");
    CHECK(one.Complete(paris) == "P");
    CHECK(one.Complete(paris) == one.Complete(paris));
    CHECK(two.Complete(Request(TemplateKind::kTripEnumeration, "Rome")) == "ANY2");
    CHECK(one.Complete(Request(TemplateKind::kTripEnumeration, "Rome")) == kMockRefusal);
    CHECK(one.Complete(Request(TemplateKind::kMealEnumeration, "Paris")) == kMockRefusal);
  }

  TEST_CASE("digest entries take priority over substring matches") {
    auto store = std::make_shared<FixtureStore>();
    const auto req = Request(TemplateKind::kOpBaseline, "Budget");
    store->Add({{"kind", "op_baseline"}, {"match", ""}, {"text", "generic"}});
    store->Add({{"kind", "op_baseline"}, {"digest", RequestDigest(req)}, {"text", "exact"}});
    MockBackend m("x", store);
    CHECK(m.Complete(req) == "exact");
    CHECK(m.Complete(Request(TemplateKind::kOpBaseline, "other")) == "generic");
  }

  TEST_CASE("fixture directory loads every scenario file") {
    const auto store = FixtureStore::LoadDirectory(testing::DataDir() / "fixtures");
    CHECK(store.size() > 24);
    CHECK_THROWS_AS(FixtureStore::LoadDirectory("/nonexistent"), Error);
    FixtureStore s;
    CHECK_THROWS_AS(s.Add({{"kind", "x"}}), Error);
  }

  TEST_CASE("base64") {
    for (std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"}) CHECK(Base64Decode(Base64Encode(s)) == s);
    CHECK(Base64Encode("foobar") == "Zm9vYmFy");
    CHECK(Base64Encode("fo") == "Zm8=");
    CHECK_THROWS_AS(Base64Decode("a*b"), Error);
  }

  TEST_CASE("URL splitting") {
    const auto u = SplitUrl("https://api.example.com/v1/chat/completions");
    CHECK(u.scheme_host_port == "https://api.example.com");
    CHECK(u.path == "/v1/chat/completions");
    CHECK(SplitUrl("http://localhost:8080").path == "/");
    CHECK_THROWS_AS(SplitUrl("localhost/x"), Error);
  }

  TEST_CASE("chat request body") {
    HttpBackendConfig c;
    c.model = "m1";
    HttpChatBackend b(c);
    auto req = Request(TemplateKind::kMealEnumeration, "tofu");
    req.attachments.push_back({"image/png", "\x89PNG"});
    const auto body = b.BuildBody(req);
    CHECK(body["model"] == "m1");
    CHECK(body["temperature"] == 0.2);
    CHECK(body["response_format"]["type"] == "json_object");
    CHECK(body["messages"][0]["content"] == "sys");
    const auto& parts = body["messages"][1]["content"];
    REQUIRE(parts.is_array());
    CHECK(parts[0]["text"] == "tofu");
    CHECK(parts[1]["image_url"]["url"] == "data:image/png;base64," + Base64Encode("\x89PNG"));
    c.temperature = 0.7;
    CHECK(HttpChatBackend(c).BuildBody(req)["temperature"] == 0.7);
  }

  TEST_CASE("chat backend against a local server") {
    httplib::Server server;
    std::string seen_auth, seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      seen_auth = req.get_header_value("Authorization");
      seen_body = req.body;
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"{\"ok\":1}"}}]})",
                      "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("PREFOPT_TEST_KEY", "sekret", 1);
    HttpBackendConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.api_key_env = "PREFOPT_TEST_KEY";
    HttpChatBackend b(c);
    CHECK(b.Complete(Request(TemplateKind::kTripEnumeration, "Paris")) == R"({"ok":1})");
    CHECK(seen_auth == "Bearer sekret");
    CHECK(nlohmann::json::parse(seen_body)["messages"][1]["content"] == "Paris");

    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
    try {
      HttpChatBackend(c).Complete(Request(TemplateKind::kTripEnumeration, "Paris"));
      FAIL("expected backend error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBackendError);
    }
    server.stop();
    t.join();
  }
}
