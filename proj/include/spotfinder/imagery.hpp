/* Copyright 2026 The Spotfinder Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */
#pragma once

/**
 * @file imagery.hpp
 * @brief Satellite and street-view acquisition with a disk cache, a shared
 *        rate limiter and per-request cost accounting.
 *
 * Requests are identified by their canonical URL (no credential). The cache
 * key is the SHA-256 of that string; each key maps to `<key>.png` plus a
 * `<key>.json` sidecar under the cache root. Entries without imagery (no
 * street-view panorama) are recorded as a sidecar carrying a `status`.
 */

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spotfinder/geo.hpp"
#include "spotfinder/raster.hpp"

namespace spotfinder::imagery
{

inline constexpr int kDefaultZoom = 21;
inline constexpr int kDefaultSize = 640;
inline constexpr int kMaxSize = 640;
inline constexpr int kStreetFov = 90;
inline constexpr int kHeadings[4] = {0, 90, 180, 270};
inline constexpr const char * kCanonicalHost = "https://maps.googleapis.com";
inline constexpr const char * kApiKeyEnv = "SPOTFINDER_API_KEY";

enum class Kind { Satellite, Street };
enum class Source { Network, Cache, Fixture };

std::string_view to_string(Kind k);
std::string_view to_string(Source s);

struct ImageryRequest
{
  Kind kind = Kind::Satellite;
  geo::GeoPoint point;
  std::optional<int> zoom;     ///< satellite only
  std::optional<int> heading;  ///< street only
  std::optional<int> fov;      ///< street only
  int width = kDefaultSize;
  int height = kDefaultSize;

  /// Query URL without credential; the identity of the request.
  std::string canonical() const;
  /// Hex SHA-256 of canonical().
  std::string key() const;

  friend bool operator==(const ImageryRequest &, const ImageryRequest &) = default;
};

/// Renders a coordinate with exactly six decimals ("33.418400"); -0 prints as 0.
std::string format_coordinate(double deg);

ImageryRequest build_satellite_request(
  const geo::GeoPoint & point, int zoom = kDefaultZoom,
  int size = kDefaultSize);
ImageryRequest build_street_request(
  const geo::GeoPoint & point, int heading, int size = kDefaultSize,
  int fov = kStreetFov);
/// The four 90-degree views (headings 0, 90, 180, 270) at one coordinate.
std::vector<ImageryRequest> build_street_requests(const geo::GeoPoint & point, int size = kDefaultSize);
/// Zero-cost panorama availability probe used before paying for street images.
std::string street_metadata_canonical(const geo::GeoPoint & point);

struct PricingModel
{
  double sat_price = 0.002;     ///< currency per satellite request
  double street_price = 0.007;  ///< currency per street-view request
};

struct CostLedger
{
  long sat_requests = 0;
  long street_requests = 0;
  double sat_price = 0.0;
  double street_price = 0.0;

  long requests() const {return sat_requests + street_requests;}
  double total() const {return sat_requests * sat_price + street_requests * street_price;}
};

struct CostEstimate
{
  long requests = 0;
  double cost = 0.0;
};

/// One satellite plus four street requests per coordinate.
CostEstimate estimate_cost(long n_coordinates, const PricingModel & pricing = {});

struct CachedImage
{
  ImageryRequest request;
  Raster body;
  std::string fetched_at;  ///< ISO-8601 UTC
  Source source = Source::Cache;
};

/// The provider has no imagery for this request.
struct NoCoverage
{
  ImageryRequest request;
  std::string status;
};

using FetchResult = std::variant<CachedImage, NoCoverage>;

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now();

/// Bounds concurrent network dispatches and spaces their start times.
class RateLimiter
{
public:
  RateLimiter(int max_in_flight = 4, std::chrono::milliseconds min_spacing = std::chrono::milliseconds(100));

  class Permit
  {
public:
    explicit Permit(RateLimiter * owner)
    : owner_(owner) {}
    Permit(Permit && other) noexcept
    : owner_(std::exchange(other.owner_, nullptr)) {}
    Permit(const Permit &) = delete;
    Permit & operator=(const Permit &) = delete;
    Permit & operator=(Permit &&) = delete;
    ~Permit()
    {
      if (owner_) {owner_->release();}
    }

private:
    RateLimiter * owner_;
  };

  /// Blocks until a slot is free and the spacing since the last dispatch elapsed.
  Permit acquire();

  int max_in_flight() const {return max_in_flight_;}
  std::chrono::milliseconds min_spacing() const {return min_spacing_;}
  int peak_in_flight() const;

  /// Limiter shared by every client in the process unless one is injected.
  static std::shared_ptr<RateLimiter> process_default();

private:
  void release();

  const int max_in_flight_;
  const std::chrono::milliseconds min_spacing_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
  std::optional<std::chrono::steady_clock::time_point> last_dispatch_;
};

/// Disk cache keyed by canonical-request hash.
class ImageCache
{
public:
  explicit ImageCache(std::string root);

  const std::string & root() const {return root_;}
  std::string image_path(const std::string & key) const;
  std::string sidecar_path(const std::string & key) const;

  /// The cached outcome for `request`, if any (image or no-coverage status).
  std::optional<FetchResult> load(const ImageryRequest & request) const;
  void store_image(const ImageryRequest & request, const Raster & body, const std::string & fetched_at, Source origin);
  void store_status(const std::string & canonical, const std::string & status, const std::string & fetched_at, Source origin);
  /// Status recorded for a canonical string without imagery (metadata probes, no-coverage).
  std::optional<std::string> load_status(const std::string & canonical) const;

private:
  void write_sidecar(const std::string & key, const std::string & text);

  std::string root_;
  mutable std::mutex mutex_;
};

/// Where imagery comes from on a cache miss.
class ImageryProvider
{
public:
  struct Image
  {
    Raster body;
    std::string fetched_at;
  };

  virtual ~ImageryProvider() = default;
  virtual Source source() const = 0;
  /// nullopt when the provider has no imagery for the request.
  virtual std::optional<Image> fetch(const ImageryRequest & request) = 0;
  /// Street-view metadata status ("OK", "ZERO_RESULTS", ...).
  virtual std::string street_status(const geo::GeoPoint & point) = 0;
};

/// Serves a directory laid out like the cache; nothing is billed.
class FixtureProvider : public ImageryProvider
{
public:
  explicit FixtureProvider(std::string dir);
  Source source() const override {return Source::Fixture;}
  std::optional<Image> fetch(const ImageryRequest & request) override;
  /// Recorded metadata status if present, else "OK" when any heading image exists.
  std::string street_status(const geo::GeoPoint & point) override;

private:
  ImageCache layout_;
};

/// HTTPS client for the static-map and street-view endpoints.
class NetworkProvider : public ImageryProvider
{
public:
  /// `base_url` replaces the canonical host at dispatch (tests point it at a local server).
  explicit NetworkProvider(std::string base_url = kCanonicalHost, std::string api_key_env = kApiKeyEnv);
  Source source() const override {return Source::Network;}
  std::optional<Image> fetch(const ImageryRequest & request) override;
  std::string street_status(const geo::GeoPoint & point) override;

private:
  std::string get(const std::string & canonical, int & status, std::string & content_type) const;

  std::string base_url_;
  std::string api_key_env_;
};

struct ClientStats
{
  long cache_hits = 0;
  long provider_fetches = 0;
  long network_fetches = 0;
};

/// Cache-first fetch with rate limiting and billing of network requests.
class ImageryClient
{
public:
  ImageryClient(
    ImageCache & cache, ImageryProvider & provider, PricingModel pricing = {},
    std::shared_ptr<RateLimiter> limiter = RateLimiter::process_default(), int max_retries = 2);

  FetchResult fetch(const ImageryRequest & request);
  /// Cached metadata probe; true when a panorama exists at `point`.
  bool street_coverage(const geo::GeoPoint & point);

  CostLedger ledger() const;
  ClientStats stats() const;

private:
  template<typename F>
  auto dispatch(F && call);
  FetchResult fetch_from_provider(const ImageryRequest & request);

  ImageCache & cache_;
  ImageryProvider & provider_;
  PricingModel pricing_;
  std::shared_ptr<RateLimiter> limiter_;
  int max_retries_;
  mutable std::mutex mutex_;
  CostLedger ledger_;
  ClientStats stats_;
  std::map<std::string, std::shared_future<FetchResult>> inflight_;
};

}  // namespace spotfinder::imagery
