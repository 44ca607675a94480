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
// Writes tests/data/fixture_survey: imagery laid out like the cache, a VIA
// project annotating every street image, and the survey config.
//
//   make_fixture_corpus <output-dir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "spotfinder/imagery.hpp"
#include "spotfinder/survey.hpp"

namespace
{

using namespace spotfinder;
using ordered_json = nlohmann::ordered_json;

constexpr const char * kFetchedAt = "2022-10-01T12:00:00Z";

// Objects per heading for each grid index, as {walls, rails, stairs}.
// Index 2 has no street coverage at all; index 6 lacks its 270-degree view.
struct Heading
{
  int walls;
  int rails;
  int stairs;
};

const std::vector<std::vector<Heading>> kPlan = {
  {{1, 0, 0}, {0, 1, 0}, {0, 1, 0}, {0, 0, 0}},  // 0: total 3
  {{2, 1, 1}, {1, 1, 1}, {1, 2, 1}, {1, 1, 2}},  // 1: total 15
  {},                                            // 2: no coverage
  {{2, 2, 1}, {2, 2, 2}, {2, 1, 2}, {1, 2, 1}},  // 3: total 20 (boundary, negative)
  {{2, 1, 1}, {2, 2, 2}, {1, 2, 2}, {3, 1, 2}},  // 4: sets of 4,6,5,6 -> 21 positive
  {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}},  // 5: total 0
  {{1, 2, 1}, {1, 1, 0}, {1, 1, 1}},             // 6: 270 missing, total 9
  {{3, 2, 2}, {2, 2, 2}, {3, 2, 1}, {2, 2, 2}},  // 7: total 25 positive
  {{2, 1, 2}, {1, 2, 1}, {2, 2, 1}, {1, 1, 2}},  // 8: total 18
};

Raster satellite_image(int index)
{
  // Buildings as blocks with a few sharp edges; edge density varies by index.
  Raster img(640, 640, Rgb{90, 110, 80});
  const int blocks = 1 + index;
  for (int b = 0; b < blocks; ++b) {
    const int x0 = (37 * (b + 1) * (index + 3)) % 560;
    const int y0 = (53 * (b + 2) * (index + 1)) % 560;
    const std::uint8_t shade = static_cast<std::uint8_t>(150 + 10 * b % 100);
    for (int y = y0; y < y0 + 80; ++y) {
      for (int x = x0; x < x0 + 80; ++x) {
        img.set(x, y, {shade, shade, shade});
      }
    }
  }
  return img;
}

Raster street_image(int index, int heading)
{
  const std::uint8_t sky = static_cast<std::uint8_t>(150 + 8 * index);
  Raster img(640, 640, Rgb{sky, static_cast<std::uint8_t>(sky + 20), 235});
  const std::uint8_t ground = static_cast<std::uint8_t>(60 + heading / 3);
  for (int y = 400; y < 640; ++y) {
    for (int x = 0; x < 640; ++x) {
      img.set(x, y, {ground, ground, ground});
    }
  }
  return img;
}

ordered_json region(const std::string & label, int slot)
{
  const int x0 = 20 + 60 * (slot % 10);
  const int y0 = 300 + 90 * (slot / 10);
  ordered_json r;
  r["shape_attributes"] = {
    {"name", "polygon"},
    {"all_points_x", {x0, x0 + 40, x0 + 40, x0}},
    {"all_points_y", {y0, y0, y0 + 50, y0 + 50}}};
  r["region_attributes"] = {{"label", label}};
  return r;
}

}  // namespace

int main(int argc, char ** argv)
{
  if (argc != 2) {
    std::cerr << "usage: make_fixture_corpus <output-dir>\n";
    return 2;
  }
  namespace fs = std::filesystem;
  const fs::path out = argv[1];
  fs::remove_all(out / "imagery");
  fs::create_directories(out);

  const nlohmann::json config_doc = {
    {"version", 1},
    {"survey_id", "fixture-9"},
    {"center", {{"lat", 33.4184}, {"lon", -111.9328}}},
    {"half_extent_m", 40.0},
    {"spacing_m", 40.0},
    {"threshold", 20},
    {"mode", "street_only"},
    {"backend", {{"kind", "fixture"}, {"annotations", "annotations.json"}}},
    {"provider", {{"kind", "fixture"}, {"dir", "imagery"}}},
    {"cache_root", "work/cache"},
    {"store_path", "work/store"},
    {"workers", 3}};
  const auto config = survey::parse_config(config_doc, out.string());
  const auto points = geo::make_grid(config.grid());
  if (points.size() != kPlan.size()) {
    std::cerr << "lattice has " << points.size() << " points, plan has " << kPlan.size() << "\n";
    return 1;
  }

  imagery::ImageCache layout((out / "imagery").string());
  // Variants exercise the case-insensitive label mapping.
  const char * wall_labels[] = {"wall", "Wall", "short wall"};
  const char * rail_labels[] = {"rail", "Railing", "RAIL"};
  const char * stair_labels[] = {"stairs", "Stairs", "stair"};

  ordered_json via = ordered_json::object();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto sat = imagery::build_satellite_request(points[i], config.zoom);
    layout.store_image(sat, satellite_image(static_cast<int>(i)), kFetchedAt, imagery::Source::Fixture);

    const auto streets = imagery::build_street_requests(points[i]);
    for (std::size_t h = 0; h < kPlan[i].size(); ++h) {
      const auto & req = streets[h];
      layout.store_image(req, street_image(static_cast<int>(i), *req.heading), kFetchedAt,
        imagery::Source::Fixture);
      const std::string filename = req.key() + ".png";
      const auto size = fs::file_size(layout.image_path(req.key()));

      ordered_json regions = ordered_json::array();
      int slot = 0;
      const auto & plan = kPlan[i][h];
      for (int k = 0; k < plan.walls; ++k) {regions.push_back(region(wall_labels[k % 3], slot++));}
      for (int k = 0; k < plan.rails; ++k) {regions.push_back(region(rail_labels[k % 3], slot++));}
      for (int k = 0; k < plan.stairs; ++k) {regions.push_back(region(stair_labels[k % 3], slot++));}
      via[filename + std::to_string(size)] = {
        {"filename", filename}, {"size", size}, {"regions", regions}, {"file_attributes", ordered_json::object()}};
    }
  }

  std::ofstream(out / "annotations.json") << via.dump(1) << "\n";
  std::ofstream(out / "config.json") << config_doc.dump(2) << "\n";
  std::cout << "wrote fixture survey with " << points.size() << " coordinates to " << out << "\n";
  return 0;
}
