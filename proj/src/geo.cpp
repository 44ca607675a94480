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
#include "spotfinder/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spotfinder/errors.hpp"

namespace spotfinder::geo
{

namespace
{

constexpr double deg2rad(double deg) {return deg * std::numbers::pi / 180.0;}

void check_mercator(double lat, int zoom)
{
  if (!std::isfinite(lat) || std::abs(lat) >= kMaxMercatorLat) {
    throw DomainError("latitude outside the Web Mercator range: " + std::to_string(lat));
  }
  if (zoom < 0 || zoom > kMaxZoom) {
    throw DomainError("zoom must be in [0, 23], got " + std::to_string(zoom));
  }
}

}  // namespace

void validate(const GeoPoint & p)
{
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
    throw DomainError("coordinates must be finite");
  }
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon >= 180.0) {
    throw DomainError(
            "coordinate out of range: (" + std::to_string(p.lat) + ", " + std::to_string(
              p.lon) + ")");
  }
}

double ground_resolution(double lat, int zoom)
{
  check_mercator(lat, zoom);
  const double equator_scale = 2.0 * std::numbers::pi * kMercatorRadius / 256.0;
  return equator_scale * std::cos(deg2rad(lat)) / std::ldexp(1.0, zoom);
}

TileFootprint tile_footprint(double lat, int zoom, int pixels)
{
  if (pixels <= 0) {
    throw DomainError("tile must have a positive pixel width");
  }
  TileFootprint fp;
  fp.zoom = zoom;
  fp.pixels = pixels;
  fp.meters_per_pixel = ground_resolution(lat, zoom);
  fp.width_m = fp.meters_per_pixel * pixels;
  return fp;
}

int axis_count(double half_extent_m, double spacing_m)
{
  if (!std::isfinite(half_extent_m) || half_extent_m < 0.0) {
    throw DomainError("half extent must be finite and non-negative");
  }
  if (!std::isfinite(spacing_m) || spacing_m <= 0.0) {
    throw DomainError("grid spacing must be positive");
  }
  return static_cast<int>(std::floor(2.0 * half_extent_m / spacing_m)) + 1;
}

std::vector<GeoPoint> make_grid(const GridSpec & spec)
{
  validate(spec.center);
  if (std::abs(spec.center.lat) >= kMaxMercatorLat) {
    throw DomainError("grid center outside the supported latitude band");
  }
  const int n = axis_count(spec.half_extent_m, spec.spacing_m);

  const double meters_per_deg_lat = kMetersPerDegree;
  const double meters_per_deg_lon = kMetersPerDegree * std::cos(deg2rad(spec.center.lat));
  const double first = -0.5 * (n - 1) * spec.spacing_m;

  std::vector<GeoPoint> points;
  points.reserve(static_cast<std::size_t>(n) * n);
  for (int row = 0; row < n; ++row) {
    const double north_m = first + row * spec.spacing_m;
    for (int col = 0; col < n; ++col) {
      const double east_m = first + col * spec.spacing_m;
      points.push_back(
        {spec.center.lat + north_m / meters_per_deg_lat,
          spec.center.lon + east_m / meters_per_deg_lon});
    }
  }
  return points;
}

double haversine(const GeoPoint & a, const GeoPoint & b)
{
  const double dlat = deg2rad(b.lat - a.lat);
  const double dlon = deg2rad(b.lon - a.lon);
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
    std::cos(deg2rad(a.lat)) * std::cos(deg2rad(b.lat)) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kMeanEarthRadius * std::asin(std::min(1.0, std::sqrt(s)));
}

}  // namespace spotfinder::geo
