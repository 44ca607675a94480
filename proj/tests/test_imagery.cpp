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

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "spotfinder/errors.hpp"
#include "spotfinder/hashing.hpp"
#include "spotfinder/imagery.hpp"
#include "support.hpp"

using namespace spotfinder;
using namespace std::chrono_literals;
using doctest::Approx;
namespace im = spotfinder::imagery;

namespace
{

const geo::GeoPoint kAsu{33.4184, -111.9328};

/// In-memory provider that pretends to be the network; optionally fails.
class CountingProvider : public im::ImageryProvider
{
public:
  explicit CountingProvider(im::Source source = im::Source::Network)
  : source_(source) {}
  std::atomic<int> fetches{0};
  std::atomic<int> failures_left{0};
  std::set<std::string> no_imagery;
  std::string status = "OK";
  int size_override = 0;
  std::chrono::milliseconds delay{0};

  im::Source source() const override {return source_;}
  std::optional<Image> fetch(const im::ImageryRequest & r) override
  {
    ++fetches;
    std::this_thread::sleep_for(delay);
    if (failures_left > 0) {
      --failures_left;
      throw RetryableError("transient");
    }
    if (no_imagery.count(r.canonical())) {
      return std::nullopt;
    }
    const int w = size_override ? size_override : r.width;
    return Image{Raster(w, r.height, Rgb{static_cast<std::uint8_t>(r.point.lat), 1, 2}), "2023-01-01T00:00:00Z"};
  }
  std::string street_status(const geo::GeoPoint &) override
  {
    ++fetches;
    return status;
  }

private:
  im::Source source_;
};

std::shared_ptr<im::RateLimiter> fast_limiter()
{
  return std::make_shared<im::RateLimiter>(4, 0ms);
}

}  // namespace

TEST_SUITE("imagery")
{
  TEST_CASE("satellite canonical request")
  {
    const auto r = im::build_satellite_request(kAsu, 21, 640);
    CHECK(r.canonical() ==
      "https://maps.googleapis.com/maps/api/staticmap?center=33.418400,-111.932800&zoom=21&size=640x640"
      "&maptype=satellite");
    CHECK(r.canonical() == im::build_satellite_request(kAsu, 21, 640).canonical());
    CHECK(r.key() == sha256_hex(r.canonical()));
    CHECK(r.key().size() == 64);
    CHECK_FALSE(r.heading.has_value());
    CHECK(r.zoom == 21);
    CHECK_THROWS_AS(im::build_satellite_request(kAsu, 24), DomainError);
    CHECK_THROWS_AS(im::build_satellite_request({91, 0}), DomainError);
  }

  TEST_CASE("coordinate formatting")
  {
    CHECK(im::format_coordinate(-0.0) == "0.000000");
    CHECK(im::format_coordinate(-0.0000001) == "0.000000");
    CHECK(im::format_coordinate(1.23456789) == "1.234568");
    CHECK(im::format_coordinate(-111.9328) == "-111.932800");
  }

  TEST_CASE("street requests")
  {
    const auto rs = im::build_street_requests(kAsu);
    REQUIRE(rs.size() == 4);
    std::multiset<int> headings;
    int fov_total = 0;
    for (const auto & r : rs) {
      headings.insert(*r.heading);
      fov_total += *r.fov;
      CHECK(r.width == 640);
      CHECK_FALSE(r.zoom.has_value());
      CHECK(r.canonical().find("heading=" + std::to_string(*r.heading)) != std::string::npos);
    }
    CHECK(headings == std::multiset<int>{0, 90, 180, 270});
    CHECK(fov_total == 360);

    std::set<std::string> keys;
    for (const auto & p : {kAsu, geo::GeoPoint{33.4185, -111.9328}}) {
      for (const auto & r : im::build_street_requests(p)) {
        keys.insert(r.key());
      }
    }
    CHECK(keys.size() == 8);
    CHECK_THROWS_AS(im::build_street_request(kAsu, 0, 641), DomainError);
    CHECK_THROWS_AS(im::build_street_request(kAsu, 45), DomainError);
    CHECK(im::street_metadata_canonical(kAsu).find("/streetview/metadata?") != std::string::npos);
  }

  TEST_CASE("cost estimate")
  {
    const auto zero = im::estimate_cost(0);
    CHECK(zero.requests == 0);
    CHECK(zero.cost == 0.0);
    const auto one = im::estimate_cost(1);
    CHECK(one.requests == 5);
    CHECK(one.cost == Approx(0.030));
    const auto asu = im::estimate_cost(1155);
    CHECK(asu.requests == 5775);
    CHECK(asu.cost == Approx(34.65).epsilon(1e-12));
    for (long n = 0; n <= 10000; n += 37) {
      const auto e = im::estimate_cost(n);
      CHECK(e.requests == 5 * n);
      CHECK(e.cost == Approx(n * one.cost).epsilon(1e-12));
    }
    CHECK_THROWS_AS(im::estimate_cost(-1), DomainError);
  }

  TEST_CASE("cache round trip and sidecar")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str("cache"));
    const auto req = im::build_satellite_request(kAsu);
    CHECK_FALSE(cache.load(req).has_value());
    std::mt19937 rng(2);
    const Raster body = testing::random_raster(640, 640, rng);
    cache.store_image(req, body, "2023-05-06T07:08:09Z", im::Source::Network);
    const auto hit = cache.load(req);
    REQUIRE(hit.has_value());
    const auto & img = std::get<im::CachedImage>(*hit);
    CHECK(img.body == body);
    CHECK(img.fetched_at == "2023-05-06T07:08:09Z");
    CHECK(img.source == im::Source::Cache);

    std::ifstream in(cache.sidecar_path(req.key()));
    const auto sidecar = nlohmann::json::parse(in);
    CHECK(sidecar["canonical_request"] == req.canonical());
    CHECK(sidecar["source"] == "network");

    std::filesystem::remove(cache.image_path(req.key()));
    CHECK_FALSE(cache.load(req).has_value());

    cache.store_status("metadata-probe", "ZERO_RESULTS", "t", im::Source::Network);
    CHECK(cache.load_status("metadata-probe") == "ZERO_RESULTS");
    CHECK_FALSE(cache.load_status("other").has_value());
  }

  TEST_CASE("client is cache-first and bills network fetches only")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    CountingProvider net;
    im::ImageryClient client(cache, net, {}, fast_limiter());
    const auto req = im::build_satellite_request(kAsu);

    const auto first = client.fetch(req);
    CHECK(std::get<im::CachedImage>(first).source == im::Source::Network);
    CHECK(client.ledger().sat_requests == 1);
    const auto second = client.fetch(req);
    CHECK(std::get<im::CachedImage>(second).source == im::Source::Cache);
    CHECK(client.ledger().sat_requests == 1);
    CHECK(net.fetches == 1);
    CHECK(client.stats().cache_hits == 1);

    CountingProvider fixture(im::Source::Fixture);
    im::ImageCache other(tmp.str("other"));
    im::ImageryClient fclient(other, fixture, {}, fast_limiter());
    fclient.fetch(req);
    CHECK(fclient.ledger().requests() == 0);
    CHECK(fclient.stats().provider_fetches == 1);
  }

  TEST_CASE("network fetch count equals distinct requests")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    CountingProvider net;
    im::ImageryClient client(cache, net, {}, fast_limiter());
    std::mt19937 rng(6);
    std::vector<im::ImageryRequest> pool;
    for (int i = 0; i < 6; ++i) {
      const geo::GeoPoint p{33.0 + i * 0.001, -111.0};
      pool.push_back(im::build_satellite_request(p));
      pool.push_back(im::build_street_request(p, 90));
    }
    std::set<std::string> distinct;
    for (int i = 0; i < 60; ++i) {
      const auto & r = pool[rng() % pool.size()];
      distinct.insert(r.canonical());
      client.fetch(r);
    }
    CHECK(net.fetches == static_cast<int>(distinct.size()));
    CHECK(client.ledger().requests() == static_cast<long>(distinct.size()));
  }

  TEST_CASE("concurrent misses on one key share a fetch")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    CountingProvider net;
    net.delay = 50ms;
    im::ImageryClient client(cache, net, {}, fast_limiter());
    const auto req = im::build_street_request(kAsu, 180);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) {
      threads.emplace_back([&] {client.fetch(req);});
    }
    for (auto & t : threads) {
      t.join();
    }
    CHECK(net.fetches == 1);
    CHECK(client.ledger().street_requests == 1);
  }

  TEST_CASE("no imagery is a recorded outcome, not an error")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    CountingProvider net;
    const auto req = im::build_street_request(kAsu, 270);
    net.no_imagery.insert(req.canonical());
    im::ImageryClient client(cache, net, {}, fast_limiter());
    const auto r = client.fetch(req);
    REQUIRE(std::holds_alternative<im::NoCoverage>(r));
    CHECK(client.ledger().street_requests == 1);
    CHECK(std::holds_alternative<im::NoCoverage>(client.fetch(req)));
    CHECK(net.fetches == 1);
  }

  TEST_CASE("street coverage probe is cached and free")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    CountingProvider net;
    net.status = "ZERO_RESULTS";
    im::ImageryClient client(cache, net, {}, fast_limiter());
    CHECK_FALSE(client.street_coverage(kAsu));
    CHECK_FALSE(client.street_coverage(kAsu));
    CHECK(net.fetches == 1);
    CHECK(client.ledger().requests() == 0);
  }

  TEST_CASE("retryable failures are retried, then surface")
  {
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    CountingProvider net;
    net.failures_left = 2;
    im::ImageryClient client(cache, net, {}, fast_limiter(), 2);
    CHECK(std::holds_alternative<im::CachedImage>(client.fetch(im::build_satellite_request(kAsu))));
    CHECK(net.fetches == 3);

    net.failures_left = 5;
    CHECK_THROWS_AS(client.fetch(im::build_satellite_request({1, 1})), RetryableError);

    CountingProvider wrong_size;
    wrong_size.size_override = 320;
    im::ImageryClient c2(cache, wrong_size, {}, fast_limiter(), 0);
    CHECK_THROWS_AS(c2.fetch(im::build_satellite_request({2, 2})), RetryableError);
  }

  TEST_CASE("rate limiter bounds in-flight work and spaces dispatches")
  {
    auto limiter = std::make_shared<im::RateLimiter>(2, 20ms);
    std::atomic<int> active{0};
    std::atomic<int> worst{0};
    std::mutex m;
    std::vector<std::chrono::steady_clock::time_point> starts;
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&] {
          auto permit = limiter->acquire();
          {
            std::lock_guard lock(m);
            starts.push_back(std::chrono::steady_clock::now());
          }
          const int now = ++active;
          int prev = worst.load();
          while (now > prev && !worst.compare_exchange_weak(prev, now)) {}
          std::this_thread::sleep_for(30ms);
          --active;
        });
    }
    for (auto & t : threads) {
      t.join();
    }
    CHECK(worst <= 2);
    CHECK(limiter->peak_in_flight() == 2);
    std::sort(starts.begin(), starts.end());
    for (std::size_t i = 1; i < starts.size(); ++i) {
      CHECK(starts[i] - starts[i - 1] >= 19ms);
    }
    CHECK_THROWS_AS(im::RateLimiter(0, 1ms), DomainError);

    const auto shared = im::RateLimiter::process_default();
    CHECK(shared == im::RateLimiter::process_default());
    CHECK(shared->max_in_flight() == 4);
    CHECK(shared->min_spacing() == 100ms);
  }

  TEST_CASE("fixture provider serves the committed corpus")
  {
    const std::string dir = testing::data_dir() + "/fixture_survey/imagery";
    im::FixtureProvider fixture(dir);
    testing::TempDir tmp;
    im::ImageCache cache(tmp.str());
    im::ImageryClient client(cache, fixture, {}, fast_limiter());

    const geo::GeoPoint p = geo::make_grid({{33.4184, -111.9328}, 40.0, 40.0})[0];
    const auto r = client.fetch(im::build_satellite_request(p));
    REQUIRE(std::holds_alternative<im::CachedImage>(r));
    CHECK(std::get<im::CachedImage>(r).source == im::Source::Fixture);
    CHECK(std::get<im::CachedImage>(r).fetched_at == "2022-10-01T12:00:00Z");
    CHECK(client.street_coverage(p));

    // Missing fixture entries read as no coverage.
    CHECK(std::holds_alternative<im::NoCoverage>(client.fetch(im::build_satellite_request({10, 10}))));
    CHECK_FALSE(client.street_coverage({10, 10}));
    CHECK(client.ledger().requests() == 0);
  }
}
