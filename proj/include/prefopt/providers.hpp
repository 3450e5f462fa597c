#pragma once

// Observables: coordinates for candidate addresses and travel-time
// matrices between spots.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "prefopt/model.hpp"

namespace prefopt {

inline constexpr double kEarthRadiusKm = 6371.0088;  // mean radius
inline constexpr double kDefaultWalkingSpeedKmh = 4.8;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

double HaversineKm(LatLon a, LatLon b);

// Walking minutes along great circles at a constant speed.
TimeMatrix HaversineMatrix(std::span<const Spot> spots, double speed_kmh = kDefaultWalkingSpeedKmh);

struct GazetteerEntry {
  std::string name;
  std::string address;
  double lat = 0.0;
  double lon = 0.0;
};

// Offline geocoder. Queries match an entry's name or address after case
// folding and whitespace collapsing; a query whose text before the first
// comma equals an entry name also matches.
class Gazetteer {
 public:
  static Gazetteer Load(const std::filesystem::path& file);
  void Add(GazetteerEntry entry);
  std::optional<LatLon> Lookup(const std::string& query) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<GazetteerEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

enum class ProviderMode { kOffline, kLive };

struct ProviderConfig {
  ProviderMode mode = ProviderMode::kOffline;
  double walking_speed_kmh = kDefaultWalkingSpeedKmh;
  std::filesystem::path gazetteer;
  // Live mode. Endpoints follow the Google geocoding / distance-matrix shape.
  std::string geocode_endpoint = "https://maps.googleapis.com/maps/api/geocode/json";
  std::string matrix_endpoint = "https://maps.googleapis.com/maps/api/distancematrix/json";
  std::string api_key_env = "MAPS_API_KEY";
  std::string travel_mode = "walking";
  std::filesystem::path cache_dir;  // empty: no disk cache
  std::size_t max_in_flight = 4;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Throws kPrecondition for an empty address, kNotFound, kApiUnavailable.
  virtual LatLon Geocode(const std::string& address) = 0;
  // Zero diagonal, non-negative entries. Throws kApiUnavailable.
  virtual TimeMatrix TravelMatrix(std::span<const Spot> spots) = 0;
};

class OfflineProvider : public Provider {
 public:
  OfflineProvider(Gazetteer gazetteer, double speed_kmh = kDefaultWalkingSpeedKmh)
      : gazetteer_(std::move(gazetteer)), speed_kmh_(speed_kmh) {}

  LatLon Geocode(const std::string& address) override;
  TimeMatrix TravelMatrix(std::span<const Spot> spots) override;

 private:
  Gazetteer gazetteer_;
  double speed_kmh_;
};

// JSON key-value file. Reads are shared, writes exclusive; every write is
// flushed through a temporary file and rename.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path file);
  std::optional<nlohmann::json> Get(const std::string& key) const;
  void Put(const std::string& key, nlohmann::json value);
  void PutAll(std::vector<std::pair<std::string, nlohmann::json>> entries);

 private:
  void FlushLocked();

  std::filesystem::path file_;
  mutable std::shared_mutex mu_;
  nlohmann::json data_ = nlohmann::json::object();
};

class LiveProvider : public Provider {
 public:
  explicit LiveProvider(ProviderConfig config);

  LatLon Geocode(const std::string& address) override;
  TimeMatrix TravelMatrix(std::span<const Spot> spots) override;

 private:
  nlohmann::json Fetch(const std::string& endpoint, const std::string& query);
  std::vector<double> FetchRow(const Spot& origin, std::span<const Spot> spots);

  ProviderConfig config_;
  std::unique_ptr<DiskCache> cache_;
};

std::unique_ptr<Provider> MakeProvider(const ProviderConfig& config);

// Percent-encoding for query strings.
std::string UrlEncode(const std::string& s);

}  // namespace prefopt
