#pragma once

// Chat-completion backends. A backend turns (messages, attachments,
// temperature, schema) into raw text; parsing lives in the instantiation
// layer.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace prefopt {

inline constexpr double kDefaultTemperature = 0.2;
inline constexpr int kDefaultParseRetries = 3;

enum class TemplateKind {
  kTripEnumeration,
  kTripValueAssignment,
  kMealEnumeration,
  kMealValueAssignment,
  kOpBaseline,
};

const char* TemplateKindName(TemplateKind kind);

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string text;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

// Opaque binary payload forwarded to the backend (e.g. a fridge photo).
struct Attachment {
  std::string mime_type;
  std::string data;
  friend bool operator==(const Attachment&, const Attachment&) = default;
};

struct LlmRequest {
  TemplateKind kind = TemplateKind::kTripEnumeration;
  std::vector<ChatMessage> messages;
  std::vector<Attachment> attachments;
  double temperature = kDefaultTemperature;
  std::string schema;  // output schema id
};

struct LlmResponse {
  std::string raw_text;
  std::optional<nlohmann::json> parsed;
  std::string parse_error;
};

// FNV-1a over kind, schema and every message; hex encoded.
std::string RequestDigest(const LlmRequest& request);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual const std::string& name() const = 0;
  // Throws Error(kBackendError) on transport failure.
  virtual std::string Complete(const LlmRequest& request) = 0;
};

// Canned reply for requests a fixture store does not cover. It is valid
// JSON but matches none of the output schemas.
inline constexpr const char* kMockRefusal =
    R"({"refusal":"no fixture matches this request"})";

// Read-only store of canned replies. Files are JSON objects:
//   {"responses": [{"kind": "...", "backend": "*", "match": "...",
//                   "digest": "...", "text": "..."}]}
// A response applies when the kind matches, the backend is "*" or equal,
// and either its digest equals the request digest or its `match` substring
// occurs in the concatenated user messages (empty match = any). Digest
// entries win over match entries; otherwise the first applicable entry wins.
class FixtureStore {
 public:
  static FixtureStore LoadDirectory(const std::filesystem::path& dir);
  static FixtureStore LoadFile(const std::filesystem::path& file);
  void Merge(const FixtureStore& other);
  void Add(nlohmann::json entry);

  const std::string* Find(const LlmRequest& request, const std::string& backend) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<nlohmann::json> entries_;
};

class MockBackend : public LlmBackend {
 public:
  MockBackend(std::string name, std::shared_ptr<const FixtureStore> store)
      : name_(std::move(name)), store_(std::move(store)) {}

  const std::string& name() const override { return name_; }
  std::string Complete(const LlmRequest& request) override;

 private:
  std::string name_;
  std::shared_ptr<const FixtureStore> store_;
};

struct HttpBackendConfig {
  std::string name = "llm-1";
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model = "gpt-4";
  std::string api_key_env = "OPENAI_API_KEY";
  std::optional<double> temperature;  // overrides the request temperature
  std::chrono::seconds timeout{120};
};

// OpenAI-style chat-completions client. Attachments are sent as data-URL
// image parts of the last user message; JSON output is requested through
// response_format.
class HttpChatBackend : public LlmBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {}

  const std::string& name() const override { return config_.name; }
  std::string Complete(const LlmRequest& request) override;

  // Request body as sent on the wire.
  nlohmann::json BuildBody(const LlmRequest& request) const;

 private:
  HttpBackendConfig config_;
};

struct ParsedUrl {
  std::string scheme_host_port;  // "https://host:443"
  std::string path;              // "/v1/chat/completions"
};
ParsedUrl SplitUrl(const std::string& url);

std::string Base64Encode(const std::string& bytes);
// Throws kInvalidInput on characters outside the standard alphabet.
std::string Base64Decode(const std::string& text);

}  // namespace prefopt
