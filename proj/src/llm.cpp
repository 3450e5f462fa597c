#include "prefopt/llm.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "httplib.h"
#include "prefopt/error.hpp"
#include "prefopt/instance_io.hpp"

namespace prefopt {

const char* TemplateKindName(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kTripEnumeration: return "trip_enumeration";
    case TemplateKind::kTripValueAssignment: return "trip_value_assignment";
    case TemplateKind::kMealEnumeration: return "meal_enumeration";
    case TemplateKind::kMealValueAssignment: return "meal_value_assignment";
    case TemplateKind::kOpBaseline: return "op_baseline";
  }
  return "unknown";
}

namespace {

void Fnv(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // Field separator so ("ab","c") and ("a","bc") differ.
  h ^= 0xff;
  h *= 0x100000001b3ULL;
}

std::string UserText(const LlmRequest& request) {
  std::string out;
  for (const auto& m : request.messages) {
    if (m.role == "user") {
      out += m.text;
      out += '\n';
    }
  }
  return out;
}

}  // namespace

std::string RequestDigest(const LlmRequest& request) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  Fnv(h, TemplateKindName(request.kind));
  Fnv(h, request.schema);
  for (const auto& m : request.messages) {
    Fnv(h, m.role);
    Fnv(h, m.text);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- fixtures -------------------------------------------------------------

FixtureStore FixtureStore::LoadFile(const std::filesystem::path& file) {
  FixtureStore store;
  const auto j = nlohmann::json::parse(ReadFile(file), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("responses") ||
      !j["responses"].is_array()) {
    throw Error(ErrorCode::kInvalidInput, "malformed fixture file " + file.string());
  }
  for (const auto& e : j["responses"]) store.Add(e);
  return store;
}

FixtureStore FixtureStore::LoadDirectory(const std::filesystem::path& dir) {
  if (std::filesystem::is_regular_file(dir)) return LoadFile(dir);
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kInvalidInput, "fixture directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  FixtureStore store;
  for (const auto& f : files) store.Merge(LoadFile(f));
  return store;
}

void FixtureStore::Merge(const FixtureStore& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

void FixtureStore::Add(nlohmann::json entry) {
  if (!entry.is_object() || !entry.contains("kind") || !entry.contains("text") ||
      !entry["text"].is_string()) {
    throw Error(ErrorCode::kInvalidInput, "fixture entry needs 'kind' and string 'text'");
  }
  entries_.push_back(std::move(entry));
}

const std::string* FixtureStore::Find(const LlmRequest& request, const std::string& backend) const {
  const std::string kind = TemplateKindName(request.kind);
  const std::string digest = RequestDigest(request);
  const std::string user = UserText(request);
  auto applies = [&](const nlohmann::json& e) {
    if (e.value("kind", "") != kind) return false;
    const std::string b = e.value("backend", "*");
    return b == "*" || b == backend;
  };
  for (const auto& e : entries_) {
    if (applies(e) && e.contains("digest") && e["digest"] == digest) {
      return e["text"].get_ptr<const std::string*>();
    }
  }
  for (const auto& e : entries_) {
    if (!applies(e) || e.contains("digest")) continue;
    const std::string match = e.value("match", "");
    if (match.empty() || user.find(match) != std::string::npos) {
      return e["text"].get_ptr<const std::string*>();
    }
  }
  return nullptr;
}

std::string MockBackend::Complete(const LlmRequest& request) {
  if (const std::string* text = store_->Find(request, name_)) return *text;
  return kMockRefusal;
}

// ---- HTTP -----------------------------------------------------------------

ParsedUrl SplitUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidInput, "URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string Base64Encode(const std::string& bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8) |
                            std::uint8_t(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = std::uint8_t(bytes[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string Base64Decode(const std::string& text) {
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    int v;
    if (c >= 'A' && c <= 'Z') v = c - 'A';
    else if (c >= 'a' && c <= 'z') v = c - 'a' + 26;
    else if (c >= '0' && c <= '9') v = c - '0' + 52;
    else if (c == '+') v = 62;
    else if (c == '/') v = 63;
    else if (c == '=' || c == '\n' || c == '\r') continue;
    else throw Error(ErrorCode::kInvalidInput, "invalid base64 input");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((acc >> bits) & 0xff);
    }
  }
  return out;
}

nlohmann::json HttpChatBackend::BuildBody(const LlmRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  std::size_t last_user = request.messages.size();
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (request.messages[i].role == "user") last_user = i;
  }
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    const auto& m = request.messages[i];
    if (i == last_user && !request.attachments.empty()) {
      nlohmann::json parts = nlohmann::json::array();
      parts.push_back({{"type", "text"}, {"text", m.text}});
      for (const auto& a : request.attachments) {
        parts.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + a.mime_type + ";base64," + Base64Encode(a.data)}}}});
      }
      messages.push_back({{"role", m.role}, {"content", std::move(parts)}});
    } else {
      messages.push_back({{"role", m.role}, {"content", m.text}});
    }
  }
  return {
      {"model", config_.model},
      {"messages", std::move(messages)},
      {"temperature", config_.temperature.value_or(request.temperature)},
      {"response_format", {{"type", "json_object"}}},
  };
}

std::string HttpChatBackend::Complete(const LlmRequest& request) {
  const ParsedUrl url = SplitUrl(config_.endpoint);
  httplib::Client client(url.scheme_host_port);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(url.path, headers, BuildBody(request).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendError,
                config_.name + ": request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendError,
                config_.name + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  const auto body = nlohmann::json::parse(res->body, nullptr, false);
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kBackendError, config_.name + ": unexpected response shape");
  }
}

}  // namespace prefopt
