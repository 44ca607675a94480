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

#include <cmath>
#include <random>
#include <set>

#include "spotfinder/errors.hpp"
#include "spotfinder/geo.hpp"
#include "support.hpp"

using namespace spotfinder;
using doctest::Approx;

TEST_SUITE("geo")
{
  TEST_CASE("ground resolution matches a measured pixel step")
  {
    for (double lat : {0.0, 12.5, 33.4184, -33.4184, 60.0, 80.0}) {
      for (int zoom : {0, 1, 10, 19, 21, 23}) {
        const double expected = testing::oracle_meters_per_pixel(lat, zoom);
        CHECK(geo::ground_resolution(lat, zoom) == Approx(expected).epsilon(1e-12));
      }
    }
    CHECK(geo::ground_resolution(0.0, 0) == Approx(156543.0339).epsilon(1e-9));
    CHECK(geo::ground_resolution(60.0, 1) == Approx(39135.7585).epsilon(1e-9));
    CHECK(geo::ground_resolution(33.4184, 21) == Approx(0.06231).epsilon(1e-3));
  }

  TEST_CASE("ground resolution halves per zoom level and is even in latitude")
  {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lat(-85.0, 85.0);
    for (int i = 0; i < 200; ++i) {
      const double a = lat(rng);
      for (int z = 0; z < geo::kMaxZoom; ++z) {
        CHECK(geo::ground_resolution(a, z + 1) == Approx(geo::ground_resolution(a, z) / 2).epsilon(1e-14));
      }
      CHECK(geo::ground_resolution(a, 12) == geo::ground_resolution(-a, 12));
    }
  }

  TEST_CASE("ground resolution rejects out of range input")
  {
    CHECK_THROWS_AS(geo::ground_resolution(85.06, 10), DomainError);
    CHECK_THROWS_AS(geo::ground_resolution(-89.0, 10), DomainError);
    CHECK_THROWS_AS(geo::ground_resolution(10.0, -1), DomainError);
    CHECK_THROWS_AS(geo::ground_resolution(10.0, 24), DomainError);
    CHECK_THROWS_AS(geo::ground_resolution(std::nan(""), 10), DomainError);
  }

  TEST_CASE("tile footprint")
  {
    const auto asu = geo::tile_footprint(33.4184, 21, 640);
    CHECK(asu.width_m == Approx(39.88).epsilon(1e-3));
    CHECK(asu.width_m == Approx(asu.meters_per_pixel * 640));
    CHECK(geo::tile_footprint(0.0, 0, 256).width_m == Approx(40075016.68558).epsilon(1e-10));
    CHECK_THROWS_AS(geo::tile_footprint(33.4184, 21, 0), DomainError);
    CHECK_THROWS_AS(geo::tile_footprint(33.4184, 21, -5), DomainError);
    CHECK_THROWS_AS(geo::tile_footprint(90.0, 21, 640), DomainError);
  }

  TEST_CASE("grid point count agrees with enumeration")
  {
    for (double spacing : {10.0, 40.0, 100.0, 39.877}) {
      for (double half : {0.0, 50.0, 650.0, 100.0}) {
        const int n = testing::oracle_axis_count(half, spacing);
        CHECK(geo::axis_count(half, spacing) == n);
        const auto pts = geo::make_grid({{33.4184, -111.9328}, half, spacing});
        CHECK(pts.size() == static_cast<std::size_t>(n) * n);
      }
    }
    CHECK(geo::make_grid({{33.4184, -111.9328}, 100.0, 40.0}).size() == 36);
  }

  TEST_CASE("degenerate grid is the center")
  {
    const geo::GeoPoint c{33.4184, -111.9328};
    const auto pts = geo::make_grid({c, 0.0, 40.0});
    REQUIRE(pts.size() == 1);
    CHECK(pts[0] == c);
  }

  TEST_CASE("ASU lattice")
  {
    const double spacing = geo::tile_footprint(33.4184, 21, 640).width_m;
    const auto pts = geo::make_grid({{33.4184, -111.9328}, 650.0, spacing});
    CHECK(pts.size() == 1089);
  }

  TEST_CASE("grid layout: symmetric, row-major south to north, spacing respected")
  {
    const geo::GeoPoint c{33.4184, -111.9328};
    const double s = 40.0;
    const auto pts = geo::make_grid({c, 100.0, s});
    const int n = 6;
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < n; ++k) {
        const auto & p = pts[r * n + k];
        if (k > 0) {
          CHECK(p.lon > pts[r * n + k - 1].lon);
          CHECK(p.lat == pts[r * n + k - 1].lat);
          CHECK(geo::haversine(p, pts[r * n + k - 1]) >= s - 0.1);
        }
        if (r > 0) {
          CHECK(p.lat > pts[(r - 1) * n + k].lat);
          CHECK(geo::haversine(p, pts[(r - 1) * n + k]) >= s - 0.1);
        }
        // Mirror point about the center.
        const auto & m = pts[(n - 1 - r) * n + (n - 1 - k)];
        CHECK((p.lat + m.lat) / 2 == Approx(c.lat).epsilon(1e-12));
        CHECK((p.lon + m.lon) / 2 == Approx(c.lon).epsilon(1e-12));
      }
    }
    // First offset is -(n-1)/2 * spacing in both axes.
    CHECK((c.lat - pts[0].lat) * geo::kMetersPerDegree == Approx(100.0));
    CHECK((c.lon - pts[0].lon) * geo::kMetersPerDegree * std::cos(c.lat * M_PI / 180) == Approx(100.0));
  }

  TEST_CASE("grid points stay within reach of the center and are deterministic")
  {
    const geo::GridSpec spec{{33.4184, -111.9328}, 650.0, 39.88};
    const auto a = geo::make_grid(spec);
    const auto b = geo::make_grid(spec);
    CHECK(a == b);
    for (const auto & p : a) {
      CHECK(geo::haversine(spec.center, p) <= spec.half_extent_m * std::sqrt(2.0) + spec.spacing_m);
    }
  }

  TEST_CASE("grid rejects invalid specs")
  {
    CHECK_THROWS_AS(geo::make_grid({{0, 0}, 100.0, 0.0}), DomainError);
    CHECK_THROWS_AS(geo::make_grid({{0, 0}, -1.0, 10.0}), DomainError);
    CHECK_THROWS_AS(geo::make_grid({{95, 0}, 100.0, 10.0}), DomainError);
  }

  TEST_CASE("haversine")
  {
    const geo::GeoPoint p{33.4184, -111.9328};
    CHECK(geo::haversine(p, p) == 0.0);
    CHECK(geo::haversine({0, 0}, {0, 1}) == Approx(111194.92664).epsilon(1e-8));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> lat(-80, 80);
    std::uniform_real_distribution<double> lon(-179, 179);
    for (int i = 0; i < 500; ++i) {
      const geo::GeoPoint a{lat(rng), lon(rng)};
      const geo::GeoPoint b{lat(rng), lon(rng)};
      CHECK(geo::haversine(a, b) == geo::haversine(b, a));
      CHECK(geo::haversine(a, b) == Approx(testing::oracle_distance(a.lat, a.lon, b.lat, b.lon)).epsilon(1e-9));
    }
  }
}
