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
// Helpers shared by the unit and acceptance tests. The oracles here are
// written independently of the library code they check.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotfinder/annotations.hpp"
#include "spotfinder/detection.hpp"
#include "spotfinder/raster.hpp"

namespace testing
{

inline std::string data_dir()
{
  return SPOTFINDER_TEST_DATA;
}

/// Scratch directory removed on destruction.
class TempDir
{
public:
  TempDir()
  {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
      ("spotfinder-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;
  const std::filesystem::path & path() const {return path_;}
  std::string str(const std::string & sub = {}) const
  {
    return sub.empty() ? path_.string() : (path_ / sub).string();
  }

private:
  std::filesystem::path path_;
};

/// Copies the committed 9-coordinate survey into a scratch directory so runs
/// can write their cache and store next to the config.
inline void copy_fixture_survey(const std::filesystem::path & to)
{
  std::filesystem::copy(
    std::filesystem::path(data_dir()) / "fixture_survey", to,
    std::filesystem::copy_options::recursive);
}

// Ground resolution measured rather than evaluated: step one pixel east in
// Web Mercator pixel space at the given latitude and measure the arc along
// the parallel on a sphere of the Mercator radius.
inline double oracle_meters_per_pixel(double lat_deg, int zoom)
{
  const double r = 6378137.0;
  const long double world_px = 256.0L * std::pow(2.0L, zoom);
  const long double lon_step_rad = 2.0L * 3.14159265358979323846264338327950288L / world_px;
  const long double parallel_radius = r * std::cos(static_cast<long double>(lat_deg) *
    3.14159265358979323846264338327950288L / 180.0L);
  return static_cast<double>(parallel_radius * lon_step_rad);
}

// Lattice by enumeration: walk integer multiples of the spacing outward from
// the center and keep those within the half extent on each side, then count.
inline int oracle_axis_count(double half_extent, double spacing)
{
  // Points at offsets -h + k*s for k = 0.. while still <= +h (with slack for
  // floating error), i.e. every step that fits inside the 2h span.
  int n = 0;
  for (int k = 0;; ++k) {
    if (k * spacing > 2.0 * half_extent + 1e-9) {
      break;
    }
    ++n;
  }
  return n;
}

// Great-circle distance via the chord between unit vectors.
inline double oracle_distance(double lat1, double lon1, double lat2, double lon2)
{
  const double d2r = 3.14159265358979323846 / 180.0;
  auto vec = [&](double lat, double lon) {
      return std::array<double, 3>{
      std::cos(lat * d2r) * std::cos(lon * d2r),
      std::cos(lat * d2r) * std::sin(lon * d2r),
      std::sin(lat * d2r)};
    };
  const auto a = vec(lat1, lon1);
  const auto b = vec(lat2, lon2);
  const double chord = std::sqrt(
    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
  return 2.0 * 6371000.0 * std::asin(chord / 2.0);
}

// Brute-force edge count: a pixel is an edge when the magnitude of the
// forward-difference luminance gradient exceeds 32.
inline long oracle_edge_pixels(const spotfinder::Raster & img)
{
  auto lum = [&](int x, int y) {
      const auto c = img.at(x, y);
      return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
    };
  long edges = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double gx = x + 1 < img.width() ? lum(x + 1, y) - lum(x, y) : 0.0;
      const double gy = y + 1 < img.height() ? lum(x, y + 1) - lum(x, y) : 0.0;
      if (gx * gx + gy * gy > 32.0 * 32.0) {
        ++edges;
      }
    }
  }
  return edges;
}

inline spotfinder::Raster random_raster(int w, int h, std::mt19937 & rng)
{
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto & v : px) {
    v = static_cast<std::uint8_t>(d(rng));
  }
  return spotfinder::Raster(w, h, std::move(px));
}

/// Writes the subset of VIA 2.x the parser understands.
inline nlohmann::ordered_json serialize_via(const spotfinder::annotations::ViaProject & p)
{
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto & img : p.images) {
    nlohmann::ordered_json regions = nlohmann::ordered_json::array();
    for (const auto & r : img.regions) {
      regions.push_back({
          {"shape_attributes", {{"name", "polygon"}, {"all_points_x", r.xs}, {"all_points_y", r.ys}}},
          {"region_attributes", {{"label", r.class_label}}}});
    }
    out[img.filename + "0"] = {{"filename", img.filename}, {"size", 0}, {"regions", regions}};
  }
  return out;
}

inline spotfinder::Detection box(spotfinder::ObjectClass cls, double confidence, double x = 0, double y = 0)
{
  return {cls, confidence, {{x, y}, {x + 10, y}, {x + 10, y + 10}, {x, y + 10}}};
}

}  // namespace testing
