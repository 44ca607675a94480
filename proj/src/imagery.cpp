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
#include "spotfinder/imagery.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iterator>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "spotfinder/errors.hpp"
#include "spotfinder/hashing.hpp"

namespace spotfinder::imagery
{

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Kind k)
{
  return k == Kind::Satellite ? "satellite" : "street";
}

std::string_view to_string(Source s)
{
  switch (s) {
    case Source::Network: return "network";
    case Source::Cache: return "cache";
    case Source::Fixture: return "fixture";
  }
  return "unknown";
}

std::string format_coordinate(double deg)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", deg);
  std::string s = buf;
  if (s == "-0.000000") {
    s = "0.000000";
  }
  return s;
}

std::string ImageryRequest::canonical() const
{
  const std::string size = std::to_string(width) + "x" + std::to_string(height);
  const std::string where = format_coordinate(point.lat) + "," + format_coordinate(point.lon);
  if (kind == Kind::Satellite) {
    return std::string(kCanonicalHost) + "/maps/api/staticmap?center=" + where +
           "&zoom=" + std::to_string(zoom.value_or(kDefaultZoom)) + "&size=" + size +
           "&maptype=satellite";
  }
  return std::string(kCanonicalHost) + "/maps/api/streetview?location=" + where +
         "&heading=" + std::to_string(heading.value_or(0)) +
         "&fov=" + std::to_string(fov.value_or(kStreetFov)) + "&size=" + size + "&source=outdoor";
}

std::string ImageryRequest::key() const
{
  return sha256_hex(canonical());
}

namespace
{

void check_size(int size)
{
  if (size <= 0 || size > kMaxSize) {
    throw DomainError(
            "image size must be in [1, 640] pixels (API maximum), got " + std::to_string(size));
  }
}

}  // namespace

ImageryRequest build_satellite_request(const geo::GeoPoint & point, int zoom, int size)
{
  geo::validate(point);
  if (zoom < 0 || zoom > geo::kMaxZoom) {
    throw DomainError("zoom must be in [0, 23], got " + std::to_string(zoom));
  }
  check_size(size);
  ImageryRequest r;
  r.kind = Kind::Satellite;
  r.point = point;
  r.zoom = zoom;
  r.width = r.height = size;
  return r;
}

ImageryRequest build_street_request(const geo::GeoPoint & point, int heading, int size, int fov)
{
  geo::validate(point);
  if (heading != 0 && heading != 90 && heading != 180 && heading != 270) {
    throw DomainError("heading must be one of 0, 90, 180, 270, got " + std::to_string(heading));
  }
  if (fov <= 0 || fov > 120) {
    throw DomainError("street-view field of view must be in (0, 120]");
  }
  check_size(size);
  ImageryRequest r;
  r.kind = Kind::Street;
  r.point = point;
  r.heading = heading;
  r.fov = fov;
  r.width = r.height = size;
  return r;
}

std::vector<ImageryRequest> build_street_requests(const geo::GeoPoint & point, int size)
{
  std::vector<ImageryRequest> out;
  for (int heading : kHeadings) {
    out.push_back(build_street_request(point, heading, size));
  }
  return out;
}

std::string street_metadata_canonical(const geo::GeoPoint & point)
{
  return std::string(kCanonicalHost) + "/maps/api/streetview/metadata?location=" +
         format_coordinate(point.lat) + "," + format_coordinate(point.lon) + "&source=outdoor";
}

CostEstimate estimate_cost(long n_coordinates, const PricingModel & pricing)
{
  if (n_coordinates < 0) {
    throw DomainError("coordinate count must be non-negative");
  }
  if (pricing.sat_price < 0.0 || pricing.street_price < 0.0) {
    throw DomainError("prices must be non-negative");
  }
  CostEstimate e;
  e.requests = 5 * n_coordinates;
  e.cost = n_coordinates * pricing.sat_price + 4 * n_coordinates * pricing.street_price;
  return e;
}

std::string utc_now()
{
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- RateLimiter ------------------------------------------------------------

RateLimiter::RateLimiter(int max_in_flight, std::chrono::milliseconds min_spacing)
: max_in_flight_(max_in_flight), min_spacing_(min_spacing)
{
  if (max_in_flight <= 0 || min_spacing.count() < 0) {
    throw DomainError("rate limiter needs at least one slot and a non-negative spacing");
  }
}

RateLimiter::Permit RateLimiter::acquire()
{
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] {return in_flight_ < max_in_flight_;});
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
  // Reserve the next dispatch slot before sleeping so waiters queue up behind it.
  auto now = std::chrono::steady_clock::now();
  auto slot = now;
  if (last_dispatch_ && *last_dispatch_ + min_spacing_ > now) {
    slot = *last_dispatch_ + min_spacing_;
  }
  last_dispatch_ = slot;
  lock.unlock();
  std::this_thread::sleep_until(slot);
  return Permit(this);
}

void RateLimiter::release()
{
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

int RateLimiter::peak_in_flight() const
{
  std::lock_guard lock(mutex_);
  return peak_;
}

std::shared_ptr<RateLimiter> RateLimiter::process_default()
{
  static const auto instance = std::make_shared<RateLimiter>();
  return instance;
}

// --- ImageCache -------------------------------------------------------------

ImageCache::ImageCache(std::string root)
: root_(std::move(root))
{
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) {
    throw FatalError("cannot create cache root " + root_ + ": " + ec.message());
  }
}

std::string ImageCache::image_path(const std::string & key) const
{
  return (fs::path(root_) / (key + ".png")).string();
}

std::string ImageCache::sidecar_path(const std::string & key) const
{
  return (fs::path(root_) / (key + ".json")).string();
}

namespace
{

std::optional<json> read_json(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    return std::nullopt;
  }
  try {
    return json::parse(in);
  } catch (const json::exception &) {
    return std::nullopt;
  }
}

void atomic_write(const std::string & path, const void * data, std::size_t size)
{
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
    if (!out) {
      throw FatalError("cannot write cache file " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw FatalError("cannot commit cache file " + path + ": " + ec.message());
  }
}

}  // namespace

std::optional<FetchResult> ImageCache::load(const ImageryRequest & request) const
{
  const std::string key = request.key();
  std::lock_guard lock(mutex_);
  const auto sidecar = read_json(sidecar_path(key));
  if (!sidecar) {
    return std::nullopt;
  }
  if (sidecar->value("canonical_request", "") != request.canonical()) {
    return std::nullopt;
  }
  if (const auto status = sidecar->value("status", std::string{"OK"}); status != "OK") {
    return NoCoverage{request, status};
  }
  const std::string png = image_path(key);
  if (!fs::exists(png)) {
    return std::nullopt;
  }
  CachedImage img;
  img.request = request;
  img.body = codec::read_image(png);
  img.fetched_at = sidecar->value("fetched_at", "");
  img.source = Source::Cache;
  return img;
}

void ImageCache::write_sidecar(const std::string & key, const std::string & text)
{
  atomic_write(sidecar_path(key), text.data(), text.size());
}

void ImageCache::store_image(
  const ImageryRequest & request, const Raster & body,
  const std::string & fetched_at, Source origin)
{
  const std::string key = request.key();
  const auto png = codec::encode_png(body);
  const json sidecar = {
    {"canonical_request", request.canonical()},
    {"fetched_at", fetched_at},
    {"source", to_string(origin)}};
  std::lock_guard lock(mutex_);
  atomic_write(image_path(key), png.data(), png.size());
  write_sidecar(key, sidecar.dump(2) + "\n");
}

void ImageCache::store_status(
  const std::string & canonical, const std::string & status,
  const std::string & fetched_at, Source origin)
{
  const json sidecar = {
    {"canonical_request", canonical},
    {"fetched_at", fetched_at},
    {"source", to_string(origin)},
    {"status", status}};
  std::lock_guard lock(mutex_);
  write_sidecar(sha256_hex(canonical), sidecar.dump(2) + "\n");
}

std::optional<std::string> ImageCache::load_status(const std::string & canonical) const
{
  std::lock_guard lock(mutex_);
  const auto sidecar = read_json(sidecar_path(sha256_hex(canonical)));
  if (!sidecar || sidecar->value("canonical_request", "") != canonical ||
    !sidecar->contains("status"))
  {
    return std::nullopt;
  }
  return sidecar->at("status").get<std::string>();
}

// --- FixtureProvider --------------------------------------------------------

FixtureProvider::FixtureProvider(std::string dir)
: layout_(std::move(dir))
{
}

std::optional<ImageryProvider::Image> FixtureProvider::fetch(const ImageryRequest & request)
{
  auto hit = layout_.load(request);
  if (!hit || std::holds_alternative<NoCoverage>(*hit)) {
    return std::nullopt;
  }
  auto & img = std::get<CachedImage>(*hit);
  return Image{std::move(img.body), std::move(img.fetched_at)};
}

std::string FixtureProvider::street_status(const geo::GeoPoint & point)
{
  if (auto status = layout_.load_status(street_metadata_canonical(point))) {
    return *status;
  }
  for (const auto & r : build_street_requests(point)) {
    if (fs::exists(layout_.image_path(r.key()))) {
      return "OK";
    }
  }
  return "ZERO_RESULTS";
}

// --- ImageryClient ----------------------------------------------------------

ImageryClient::ImageryClient(
  ImageCache & cache, ImageryProvider & provider, PricingModel pricing,
  std::shared_ptr<RateLimiter> limiter, int max_retries)
: cache_(cache), provider_(provider), pricing_(pricing), limiter_(std::move(limiter)),
  max_retries_(max_retries)
{
  ledger_.sat_price = pricing_.sat_price;
  ledger_.street_price = pricing_.street_price;
}

template<typename F>
auto ImageryClient::dispatch(F && call)
{
  if (provider_.source() != Source::Network) {
    return call();
  }
  for (int attempt = 0;; ++attempt) {
    try {
      auto permit = limiter_->acquire();
      return call();
    } catch (const RetryableError &) {
      if (attempt >= max_retries_) {
        throw;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << attempt));
    }
  }
}

FetchResult ImageryClient::fetch(const ImageryRequest & request)
{
  if (auto hit = cache_.load(request)) {
    std::lock_guard lock(mutex_);
    ++stats_.cache_hits;
    return std::move(*hit);
  }

  // Concurrent misses on one key share a single provider fetch.
  const std::string key = request.key();
  std::promise<FetchResult> promise;
  std::shared_future<FetchResult> pending;
  {
    std::lock_guard lock(mutex_);
    if (const auto it = inflight_.find(key); it != inflight_.end()) {
      pending = it->second;
    } else {
      inflight_.emplace(key, promise.get_future().share());
    }
  }
  if (pending.valid()) {
    FetchResult shared = pending.get();
    if (auto * img = std::get_if<CachedImage>(&shared)) {
      img->source = Source::Cache;
    }
    std::lock_guard lock(mutex_);
    ++stats_.cache_hits;
    return shared;
  }

  try {
    // Another worker may have finished this key between the first lookup
    // and our registration.
    auto late_hit = cache_.load(request);
    if (late_hit) {
      std::lock_guard lock(mutex_);
      ++stats_.cache_hits;
    }
    FetchResult result = late_hit ? std::move(*late_hit) : fetch_from_provider(request);
    promise.set_value(result);
    std::lock_guard lock(mutex_);
    inflight_.erase(key);
    return result;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    inflight_.erase(key);
    throw;
  }
}

FetchResult ImageryClient::fetch_from_provider(const ImageryRequest & request)
{
  auto image = dispatch([&] {return provider_.fetch(request);});
  const bool billed = provider_.source() == Source::Network;
  {
    std::lock_guard lock(mutex_);
    ++stats_.provider_fetches;
    if (billed) {
      ++stats_.network_fetches;
      ++(request.kind == Kind::Satellite ? ledger_.sat_requests : ledger_.street_requests);
    }
  }

  if (!image) {
    cache_.store_status(request.canonical(), "NO_IMAGERY", utc_now(), provider_.source());
    return NoCoverage{request, "NO_IMAGERY"};
  }
  if (image->body.width() != request.width || image->body.height() != request.height) {
    throw RetryableError(
            "provider returned a " + std::to_string(image->body.width()) + "x" +
            std::to_string(image->body.height()) + " image for " + request.canonical());
  }
  cache_.store_image(request, image->body, image->fetched_at, provider_.source());
  return CachedImage{request, std::move(image->body), std::move(image->fetched_at), provider_.source()};
}

bool ImageryClient::street_coverage(const geo::GeoPoint & point)
{
  const std::string canonical = street_metadata_canonical(point);
  if (auto status = cache_.load_status(canonical)) {
    return *status == "OK";
  }
  const std::string status = dispatch([&] {return provider_.street_status(point);});
  cache_.store_status(canonical, status, utc_now(), provider_.source());
  return status == "OK";
}

CostLedger ImageryClient::ledger() const
{
  std::lock_guard lock(mutex_);
  return ledger_;
}

ClientStats ImageryClient::stats() const
{
  std::lock_guard lock(mutex_);
  return stats_;
}

}  // namespace spotfinder::imagery
