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
#include "spotfinder/detectors.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "spotfinder/errors.hpp"

namespace spotfinder
{

std::string_view to_string(ObjectClass c)
{
  switch (c) {
    case ObjectClass::ShortWall: return "short_wall";
    case ObjectClass::Railing: return "railing";
    case ObjectClass::Stairs: return "stairs";
  }
  return "unknown";
}

std::optional<ObjectClass> parse_object_class(std::string_view name)
{
  for (const auto c : kObjectClasses) {
    if (to_string(c) == name) {
      return c;
    }
  }
  return std::nullopt;
}

}  // namespace spotfinder

namespace spotfinder::detectors
{

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

constexpr double kEdgeThreshold = 32.0;
constexpr double kSaturatingEdgeFraction = 0.15;
constexpr int kStreetCell = 64;
constexpr double kStreetCellDensity = 0.10;

struct Gradient
{
  double gx;
  double gy;
};

// Forward differences; pixels past the right/bottom border contribute 0.
std::vector<Gradient> gradients(const Raster & img)
{
  const int w = img.width();
  const int h = img.height();
  std::vector<double> lum(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      lum[static_cast<std::size_t>(y) * w + x] = luminance(img.at(x, y));
    }
  }
  std::vector<Gradient> g(lum.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g[i].gx = x + 1 < w ? lum[i + 1] - lum[i] : 0.0;
      g[i].gy = y + 1 < h ? lum[i + w] - lum[i] : 0.0;
    }
  }
  return g;
}

bool is_edge(const Gradient & g)
{
  return std::hypot(g.gx, g.gy) > kEdgeThreshold;
}

void check_probability(double p, const std::string & ref)
{
  if (!(p >= 0.0 && p <= 1.0)) {
    throw BackendError("backend returned probability outside [0, 1] for " + ref);
  }
}

void validate_detection(const Detection & d, const Raster & image, const std::string & ref)
{
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw BackendError("detection confidence outside [0, 1] in " + ref);
  }
  if (d.polygon.size() < 3) {
    throw BackendError("detection polygon with fewer than 3 vertices in " + ref);
  }
  for (const auto & v : d.polygon) {
    if (!(v.x >= 0.0 && v.y >= 0.0 && v.x <= image.width() && v.y <= image.height())) {
      throw BackendError("detection polygon leaves the image bounds in " + ref);
    }
  }
}

std::string shell_quote(const std::string & s)
{
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

SatelliteScore classify_tile(const preprocess::QuadrantSet & quadrants, const DetectorBackend & backend)
{
  SatelliteScore score;
  for (std::size_t i = 0; i < quadrants.tiles.size(); ++i) {
    const auto & tile = quadrants.tiles[i];
    if (tile.width() != preprocess::kQuadrant || tile.height() != preprocess::kQuadrant) {
      throw DomainError("classify_tile expects four 256x256 quadrants");
    }
    const std::string ref = quadrants.parent + "#q" + std::to_string(i);
    double p = 0.0;
    try {
      p = backend.classify_quadrant(tile, ref);
    } catch (const BackendError &) {
      throw;
    } catch (const std::exception & e) {
      throw BackendError("backend '" + backend.id() + "' failed on " + ref + ": " + e.what());
    }
    check_probability(p, ref);
    score.quadrant_probs[i] = p;
  }
  score.max_prob = *std::max_element(score.quadrant_probs.begin(), score.quadrant_probs.end());
  return score;
}

DetectionSet filter_by_confidence(DetectionSet set, double min_confidence)
{
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw DomainError("min_confidence must be in [0, 1]");
  }
  std::erase_if(
    set.detections,
    [min_confidence](const Detection & d) {return d.confidence < min_confidence;});
  return set;
}

DetectionSet segment_street(
  const Raster & image, const std::string & ref,
  const DetectorBackend & backend, double min_confidence)
{
  if (image.empty() || image.width() > kMaxStreetSize || image.height() > kMaxStreetSize) {
    throw DomainError("street image must be non-empty and at most 640x640");
  }
  DetectionSet set;
  set.image = ref;
  set.width = image.width();
  set.height = image.height();
  try {
    set.detections = backend.segment_street(image, ref);
  } catch (const BackendError &) {
    throw;
  } catch (const std::exception & e) {
    throw BackendError("backend '" + backend.id() + "' failed on " + ref + ": " + e.what());
  }
  for (const auto & d : set.detections) {
    validate_detection(d, image, ref);
  }
  return filter_by_confidence(std::move(set), min_confidence);
}

double heuristic_satellite_prob(const Raster & tile)
{
  if (tile.width() != preprocess::kQuadrant || tile.height() != preprocess::kQuadrant) {
    throw DomainError("heuristic classifier expects a 256x256 tile");
  }
  const auto g = gradients(tile);
  const auto edges = std::count_if(g.begin(), g.end(), is_edge);
  const double fraction = static_cast<double>(edges) / static_cast<double>(g.size());
  return std::min(1.0, fraction / kSaturatingEdgeFraction);
}

double HeuristicBackend::classify_quadrant(const Raster & tile, const std::string &) const
{
  return heuristic_satellite_prob(tile);
}

std::vector<Detection> HeuristicBackend::segment_street(const Raster & image, const std::string &) const
{
  const auto g = gradients(image);
  const int w = image.width();
  const int h = image.height();
  std::vector<Detection> out;
  for (int y0 = 0; y0 < h; y0 += kStreetCell) {
    for (int x0 = 0; x0 < w; x0 += kStreetCell) {
      const int x1 = std::min(w, x0 + kStreetCell);
      const int y1 = std::min(h, y0 + kStreetCell);
      long horizontal = 0;
      long vertical = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const auto & px = g[static_cast<std::size_t>(y) * w + x];
          if (!is_edge(px)) {
            continue;
          }
          // A vertical intensity change is a horizontal edge (ledge, step).
          if (std::abs(px.gy) >= std::abs(px.gx)) {
            ++horizontal;
          } else {
            ++vertical;
          }
        }
      }
      const double area = static_cast<double>(x1 - x0) * (y1 - y0);
      const double density = (horizontal + vertical) / area;
      if (density < kStreetCellDensity) {
        continue;
      }
      const double h_share = static_cast<double>(horizontal) / (horizontal + vertical);
      Detection d;
      d.cls = h_share >= 0.65 ? ObjectClass::ShortWall :
        h_share <= 0.35 ? ObjectClass::Railing : ObjectClass::Stairs;
      d.confidence = std::min(1.0, 0.5 + density);
      d.polygon = {
        {static_cast<double>(x0), static_cast<double>(y0)},
        {static_cast<double>(x1), static_cast<double>(y0)},
        {static_cast<double>(x1), static_cast<double>(y1)},
        {static_cast<double>(x0), static_cast<double>(y1)}};
      out.push_back(std::move(d));
    }
  }
  return out;
}

FixtureBackend::FixtureBackend(
  std::vector<annotations::AnnotatedImage> images,
  std::map<std::string, double> quadrant_probs,
  double confidence)
: quadrant_probs_(std::move(quadrant_probs))
{
  for (const auto & img : images) {
    by_file_[img.filename] = annotations::to_detection_set(img, confidence);
  }
}

std::unique_ptr<FixtureBackend> FixtureBackend::from_files(
  const std::string & via_path,
  const std::string & quadrant_probs_path)
{
  auto project = annotations::load_via(via_path);
  std::map<std::string, double> probs;
  if (!quadrant_probs_path.empty()) {
    std::ifstream in(quadrant_probs_path);
    if (!in) {
      throw NotFoundError("cannot open quadrant probability table " + quadrant_probs_path);
    }
    probs = json::parse(in).get<std::map<std::string, double>>();
  }
  return std::make_unique<FixtureBackend>(std::move(project.images), std::move(probs));
}

double FixtureBackend::classify_quadrant(const Raster & tile, const std::string & ref) const
{
  if (const auto it = quadrant_probs_.find(ref); it != quadrant_probs_.end()) {
    return it->second;
  }
  return heuristic_satellite_prob(tile);
}

std::vector<Detection> FixtureBackend::segment_street(const Raster &, const std::string & ref) const
{
  auto it = by_file_.find(ref + ".png");
  if (it == by_file_.end()) {
    it = by_file_.find(ref);
  }
  if (it == by_file_.end()) {
    throw BackendError("fixture backend has no annotations for " + ref);
  }
  return it->second.detections;
}

ExternalProcessBackend::ExternalProcessBackend(std::string command, std::string work_dir)
: command_(std::move(command)), work_dir_(std::move(work_dir))
{
  fs::create_directories(work_dir_);
}

std::string ExternalProcessBackend::invoke(
  const Raster & image, const std::string & ref,
  const char * kind) const
{
  const std::string stem = (fs::path(work_dir_) /
    ("req-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++))).string();
  const std::string image_path = stem + ".png";
  const std::string request_path = stem + ".request.json";
  const std::string response_path = stem + ".response.json";

  struct Cleanup
  {
    std::vector<std::string> paths;
    ~Cleanup()
    {
      std::error_code ec;
      for (const auto & p : paths) {
        fs::remove(p, ec);
      }
    }
  } cleanup{{image_path, request_path, response_path}};

  codec::write_png(image_path, image);
  {
    std::ofstream req(request_path);
    req << json{
      {"schema", kSchema}, {"kind", kind}, {"ref", ref},
      {"image_path", image_path}, {"width", image.width()}, {"height", image.height()}}.dump(2);
  }
  const std::string cmd = command_ + " " + shell_quote(request_path) + " " + shell_quote(response_path);
  const int rc = std::system(cmd.c_str());
  if (rc != 0) {
    throw BackendError("detector process exited with status " + std::to_string(rc) + " for " + ref);
  }
  std::ifstream resp(response_path);
  if (!resp) {
    throw BackendError("detector process wrote no response for " + ref);
  }
  return std::string{std::istreambuf_iterator<char>(resp), {}};
}

double ExternalProcessBackend::classify_quadrant(const Raster & tile, const std::string & ref) const
{
  const auto text = invoke(tile, ref, "satellite_quadrant");
  try {
    const auto doc = json::parse(text);
    if (doc.value("schema", "") != kSchema) {
      throw BackendError("detector response has wrong schema for " + ref);
    }
    return doc.at("probability").get<double>();
  } catch (const json::exception & e) {
    throw BackendError("malformed detector response for " + ref + ": " + e.what());
  }
}

std::vector<Detection> ExternalProcessBackend::segment_street(
  const Raster & image,
  const std::string & ref) const
{
  const auto text = invoke(image, ref, "street");
  std::vector<Detection> out;
  try {
    const auto doc = json::parse(text);
    if (doc.value("schema", "") != kSchema) {
      throw BackendError("detector response has wrong schema for " + ref);
    }
    for (const auto & item : doc.at("detections")) {
      const auto label = item.at("class").get<std::string>();
      const auto cls = parse_object_class(label);
      if (!cls) {
        throw BackendError("detector returned unknown class '" + label + "' for " + ref);
      }
      Detection d;
      d.cls = *cls;
      d.confidence = item.at("confidence").get<double>();
      for (const auto & v : item.at("polygon")) {
        d.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      }
      out.push_back(std::move(d));
    }
  } catch (const json::exception & e) {
    throw BackendError("malformed detector response for " + ref + ": " + e.what());
  }
  return out;
}

}  // namespace spotfinder::detectors
