#include "prefopt/providers.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <numbers>

#include "httplib.h"
#include "prefopt/error.hpp"
#include "prefopt/instance_io.hpp"
#include "prefopt/llm.hpp"

namespace prefopt {
namespace {

std::string Normalize(const std::string& s) {
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

double Radians(double deg) { return deg * std::numbers::pi / 180.0; }

std::string CoordKey(const Spot& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.7f,%.7f", s.lat, s.lon);
  return buf;
}

}  // namespace

double HaversineKm(LatLon a, LatLon b) {
  const double dlat = Radians(b.lat - a.lat);
  const double dlon = Radians(b.lon - a.lon);
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(Radians(a.lat)) * std::cos(Radians(b.lat)) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

TimeMatrix HaversineMatrix(std::span<const Spot> spots, double speed_kmh) {
  if (!(speed_kmh > 0.0)) throw Error(ErrorCode::kInvalidInput, "walking speed must be positive");
  TimeMatrix m(spots.size());
  for (std::size_t i = 0; i < spots.size(); ++i) {
    for (std::size_t j = i + 1; j < spots.size(); ++j) {
      const double minutes =
          HaversineKm({spots[i].lat, spots[i].lon}, {spots[j].lat, spots[j].lon}) / speed_kmh *
          kMinutesPerHour;
      m(i, j) = minutes;
      m(j, i) = minutes;
    }
  }
  return m;
}

// ---- gazetteer -------------------------------------------------------------

Gazetteer Gazetteer::Load(const std::filesystem::path& file) {
  const auto j = nlohmann::json::parse(ReadFile(file), nullptr, false);
  if (j.is_discarded() || !j.is_array()) {
    throw Error(ErrorCode::kInvalidInput, "gazetteer must be a JSON array: " + file.string());
  }
  Gazetteer g;
  for (const auto& e : j) {
    try {
      g.Add({e.at("name").get<std::string>(), e.value("address", ""), e.at("lat").get<double>(),
             e.at("lon").get<double>()});
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kInvalidInput, std::string("bad gazetteer entry: ") + ex.what());
    }
  }
  return g;
}

void Gazetteer::Add(GazetteerEntry entry) {
  if (entry.lat < -90 || entry.lat > 90 || entry.lon < -180 || entry.lon > 180) {
    throw Error(ErrorCode::kInvalidInput, "gazetteer coordinates out of range: " + entry.name);
  }
  const std::size_t i = entries_.size();
  index_.emplace(Normalize(entry.name), i);
  if (!entry.address.empty()) index_.emplace(Normalize(entry.address), i);
  entries_.push_back(std::move(entry));
}

std::optional<LatLon> Gazetteer::Lookup(const std::string& query) const {
  auto it = index_.find(Normalize(query));
  if (it == index_.end()) it = index_.find(Normalize(query.substr(0, query.find(','))));
  if (it == index_.end()) return std::nullopt;
  const auto& e = entries_[it->second];
  return LatLon{e.lat, e.lon};
}

LatLon OfflineProvider::Geocode(const std::string& address) {
  if (Normalize(address).empty()) throw Error(ErrorCode::kPrecondition, "empty address");
  if (auto p = gazetteer_.Lookup(address)) return *p;
  throw Error(ErrorCode::kNotFound, "address not in gazetteer: " + address);
}

TimeMatrix OfflineProvider::TravelMatrix(std::span<const Spot> spots) {
  return HaversineMatrix(spots, speed_kmh_);
}

// ---- cache -----------------------------------------------------------------

DiskCache::DiskCache(std::filesystem::path file) : file_(std::move(file)) {
  if (std::filesystem::exists(file_)) {
    auto j = nlohmann::json::parse(ReadFile(file_), nullptr, false);
    if (j.is_object()) data_ = std::move(j);
  }
}

std::optional<nlohmann::json> DiskCache::Get(const std::string& key) const {
  std::shared_lock lock(mu_);
  if (auto it = data_.find(key); it != data_.end()) return *it;
  return std::nullopt;
}

void DiskCache::Put(const std::string& key, nlohmann::json value) {
  std::unique_lock lock(mu_);
  data_[key] = std::move(value);
  FlushLocked();
}

void DiskCache::PutAll(std::vector<std::pair<std::string, nlohmann::json>> entries) {
  std::unique_lock lock(mu_);
  for (auto& [k, v] : entries) data_[k] = std::move(v);
  FlushLocked();
}

void DiskCache::FlushLocked() {
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  const auto tmp = file_.string() + ".tmp";
  WriteFile(tmp, data_.dump(2) + "\n");
  std::filesystem::rename(tmp, file_);
}

// ---- live ------------------------------------------------------------------

std::string UrlEncode(const std::string& s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == ',') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

LiveProvider::LiveProvider(ProviderConfig config) : config_(std::move(config)) {
  if (!config_.cache_dir.empty()) {
    cache_ = std::make_unique<DiskCache>(config_.cache_dir / "provider_cache.json");
  }
}

nlohmann::json LiveProvider::Fetch(const std::string& endpoint, const std::string& query) {
  const ParsedUrl url = SplitUrl(endpoint);
  httplib::Client client(url.scheme_host_port);
  client.set_read_timeout(std::chrono::seconds(30));
  std::string path = url.path + "?" + query;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    path += "&key=" + UrlEncode(key);
  }
  auto res = client.Get(path);
  if (!res) {
    throw Error(ErrorCode::kApiUnavailable, "maps request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kApiUnavailable, "maps request returned HTTP " + std::to_string(res->status));
  }
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kApiUnavailable, "maps response is not a JSON object");
  }
  return j;
}

LatLon LiveProvider::Geocode(const std::string& address) {
  if (Normalize(address).empty()) throw Error(ErrorCode::kPrecondition, "empty address");
  const std::string key = "geocode|" + Normalize(address);
  if (cache_) {
    if (auto hit = cache_->Get(key)) return {hit->at("lat").get<double>(), hit->at("lon").get<double>()};
  }
  const auto j = Fetch(config_.geocode_endpoint, "address=" + UrlEncode(address));
  const std::string status = j.value("status", "");
  if (status == "ZERO_RESULTS") throw Error(ErrorCode::kNotFound, "address not found: " + address);
  LatLon out;
  try {
    if (status != "OK") throw Error(ErrorCode::kApiUnavailable, "geocoding status " + status);
    const auto& loc = j.at("results").at(0).at("geometry").at("location");
    out = {loc.at("lat").get<double>(), loc.at("lng").get<double>()};
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kApiUnavailable, "unexpected geocoding response shape");
  }
  if (out.lat < -90 || out.lat > 90 || out.lon < -180 || out.lon > 180) {
    throw Error(ErrorCode::kApiUnavailable, "geocoding returned out-of-range coordinates");
  }
  if (cache_) cache_->Put(key, {{"lat", out.lat}, {"lon", out.lon}});
  return out;
}

std::vector<double> LiveProvider::FetchRow(const Spot& origin, std::span<const Spot> spots) {
  std::vector<double> row(spots.size(), 0.0);
  std::vector<std::size_t> missing;
  for (std::size_t j = 0; j < spots.size(); ++j) {
    if (CoordKey(spots[j]) == CoordKey(origin)) continue;
    const std::string key = config_.travel_mode + "|" + CoordKey(origin) + "|" + CoordKey(spots[j]);
    if (cache_) {
      if (auto hit = cache_->Get(key)) {
        row[j] = hit->get<double>();
        continue;
      }
    }
    missing.push_back(j);
  }
  if (missing.empty()) return row;

  std::string dests;
  for (std::size_t j : missing) {
    if (!dests.empty()) dests += "|";
    dests += CoordKey(spots[j]);
  }
  const auto res = Fetch(config_.matrix_endpoint, "origins=" + UrlEncode(CoordKey(origin)) +
                                                      "&destinations=" + UrlEncode(dests) +
                                                      "&mode=" + UrlEncode(config_.travel_mode));
  try {
    if (res.value("status", "") != "OK") {
      throw Error(ErrorCode::kApiUnavailable, "distance matrix status " + res.value("status", ""));
    }
    const auto& elements = res.at("rows").at(0).at("elements");
    if (elements.size() != missing.size()) {
      throw Error(ErrorCode::kApiUnavailable, "distance matrix row has the wrong length");
    }
    for (std::size_t k = 0; k < missing.size(); ++k) {
      const auto& e = elements[k];
      if (e.value("status", "") != "OK") {
        throw Error(ErrorCode::kApiUnavailable, "no route between spots");
      }
      const double minutes = e.at("duration").at("value").get<double>() / 60.0;
      if (!(minutes >= 0.0)) throw Error(ErrorCode::kApiUnavailable, "negative travel time");
      row[missing[k]] = minutes;
    }
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kApiUnavailable, "unexpected distance matrix response shape");
  }
  return row;
}

TimeMatrix LiveProvider::TravelMatrix(std::span<const Spot> spots) {
  const std::size_t n = spots.size();
  std::vector<std::vector<double>> rows(n);
  // Rows are fetched in waves of at most max_in_flight requests. Nothing is
  // cached until every row succeeded, so a failure never leaves a matrix
  // assembled from mixed sources.
  const std::size_t wave = std::max<std::size_t>(1, config_.max_in_flight);
  for (std::size_t start = 0; start < n; start += wave) {
    std::vector<std::future<std::vector<double>>> pending;
    for (std::size_t i = start; i < std::min(n, start + wave); ++i) {
      pending.push_back(std::async(std::launch::async, [this, &spots, i] {
        return FetchRow(spots[i], spots);
      }));
    }
    std::optional<Error> failure;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      try {
        rows[start + k] = pending[k].get();
      } catch (const Error& e) {
        if (!failure) failure = e;
      }
    }
    if (failure) throw *failure;
  }
  TimeMatrix m(n);
  std::vector<std::pair<std::string, nlohmann::json>> fresh;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = i == j ? 0.0 : rows[i][j];
      if (i != j) {
        fresh.emplace_back(config_.travel_mode + "|" + CoordKey(spots[i]) + "|" + CoordKey(spots[j]),
                           m(i, j));
      }
    }
  }
  if (cache_ && !fresh.empty()) cache_->PutAll(std::move(fresh));
  return m;
}

std::unique_ptr<Provider> MakeProvider(const ProviderConfig& config) {
  if (config.mode == ProviderMode::kLive) return std::make_unique<LiveProvider>(config);
  Gazetteer g = config.gazetteer.empty() ? Gazetteer{} : Gazetteer::Load(config.gazetteer);
  return std::make_unique<OfflineProvider>(std::move(g), config.walking_speed_kmh);
}

}  // namespace prefopt
