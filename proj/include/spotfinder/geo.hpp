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
 * @file geo.hpp
 * @brief Web Mercator ground resolution and the survey lattice.
 */

#include <vector>

namespace spotfinder::geo
{

/// WGS84 semi-major axis, used by the Web Mercator projection.
inline constexpr double kMercatorRadius = 6378137.0;
/// Mean Earth radius for great-circle distances.
inline constexpr double kMeanEarthRadius = 6371000.0;
/// Web Mercator is undefined beyond this latitude.
inline constexpr double kMaxMercatorLat = 85.05113;
inline constexpr int kMaxZoom = 23;
/// Meters per degree of latitude in the local equirectangular approximation.
inline constexpr double kMetersPerDegree = 111320.0;

struct GeoPoint
{
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint &, const GeoPoint &) = default;
};

/// Throws DomainError unless both coordinates are finite and within
/// lat [-90, 90], lon [-180, 180).
void validate(const GeoPoint & p);

struct GridSpec
{
  GeoPoint center;
  double half_extent_m = 0.0;  ///< half the side of the surveyed square
  double spacing_m = 0.0;
};

struct TileFootprint
{
  int zoom = 0;
  int pixels = 0;
  double meters_per_pixel = 0.0;
  double width_m = 0.0;
};

/// Meters per pixel of a 256-px Web Mercator tile pyramid at `lat` and `zoom`.
double ground_resolution(double lat, int zoom);

/// Ground width covered by a `pixels`-wide image centered at `lat`.
TileFootprint tile_footprint(double lat, int zoom, int pixels);

/// Number of lattice points along one axis.
int axis_count(double half_extent_m, double spacing_m);

/**
 * @brief Symmetric square lattice around `spec.center`.
 *
 * Rows run south to north, and within a row points run west to east.
 * Meter offsets are converted to degrees with a local equirectangular
 * approximation anchored at the center latitude.
 */
std::vector<GeoPoint> make_grid(const GridSpec & spec);

/// Great-circle distance in meters.
double haversine(const GeoPoint & a, const GeoPoint & b);

}  // namespace spotfinder::geo
