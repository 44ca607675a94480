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
#include "spotfinder/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace spotfinder::annotations
{

using json = nlohmann::ordered_json;

namespace
{

std::string normalize(std::string_view label)
{
  std::string s;
  for (char c : label) {
    if (c == ' ' || c == '-') {
      c = '_';
    }
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  const auto first = s.find_first_not_of('_');
  const auto last = s.find_last_not_of('_');
  return first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
}

std::vector<double> read_coords(const json & arr, const std::string & image, std::size_t region)
{
  if (!arr.is_array()) {
    throw ViaRegionError(
            "image '" + image + "' region " + std::to_string(region) + ": polygon coordinates missing",
            image, region);
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto & v : arr) {
    if (!v.is_number()) {
      throw ViaRegionError(
              "image '" + image + "' region " + std::to_string(region) +
              ": non-numeric polygon coordinate", image, region);
    }
    out.push_back(v.get<double>());
  }
  return out;
}

// The first attribute value that maps onto the class set wins; otherwise the
// first non-empty value is kept so the caller can report it.
std::string read_label(const json & attrs)
{
  std::string fallback;
  auto consider = [&](const std::string & candidate) {
      if (candidate.empty()) {
        return false;
      }
      if (map_label(candidate)) {
        return true;
      }
      if (fallback.empty()) {
        fallback = candidate;
      }
      return false;
    };

  if (!attrs.is_object()) {
    return {};
  }
  for (const auto & [key, value] : attrs.items()) {
    if (value.is_string()) {
      if (consider(value.get<std::string>())) {
        return value.get<std::string>();
      }
    } else if (value.is_object()) {
      // checkbox / dropdown attributes: {"option": true}
      for (const auto & [option, on] : value.items()) {
        if (on.is_boolean() && on.get<bool>() && consider(option)) {
          return option;
        }
      }
    }
  }
  return fallback;
}

AnnotatedImage read_entry(const json & entry, const std::string & entry_key, ViaProject & project)
{
  if (!entry.is_object()) {
    throw ViaParseError("VIA entry '" + entry_key + "' is not an object", 0);
  }
  AnnotatedImage image;
  const auto fn = entry.find("filename");
  if (fn == entry.end() || !fn->is_string()) {
    throw ViaParseError("VIA entry '" + entry_key + "' has no filename", 0);
  }
  image.filename = fn->get<std::string>();

  const auto regions_it = entry.find("regions");
  if (regions_it == entry.end() || regions_it->is_null()) {
    return image;
  }
  std::vector<const json *> regions;
  if (regions_it->is_array() || regions_it->is_object()) {
    for (const auto & r : *regions_it) {
      regions.push_back(&r);
    }
  } else {
    throw ViaParseError("VIA entry '" + entry_key + "' has malformed regions", 0);
  }

  for (std::size_t i = 0; i < regions.size(); ++i) {
    const json & region = *regions[i];
    const auto & shape = region.value("shape_attributes", json::object());
    const std::string name = shape.value("name", std::string{});
    if (name != "polygon") {
      project.warnings.push_back(
        "image '" + image.filename + "' region " + std::to_string(i) + ": unsupported shape '" +
        name + "' skipped");
      continue;
    }
    AnnotatedRegion out;
    out.xs = read_coords(shape.value("all_points_x", json()), image.filename, i);
    out.ys = read_coords(shape.value("all_points_y", json()), image.filename, i);
    if (out.xs.size() != out.ys.size()) {
      throw ViaRegionError(
              "image '" + image.filename + "' region " + std::to_string(i) +
              ": all_points_x and all_points_y differ in length (" + std::to_string(out.xs.size()) +
              " vs " + std::to_string(out.ys.size()) + ")", image.filename, i);
    }
    if (out.xs.size() < 3) {
      throw ViaRegionError(
              "image '" + image.filename + "' region " + std::to_string(i) +
              ": polygon needs at least 3 vertices, has " + std::to_string(out.xs.size()),
              image.filename, i);
    }
    out.class_label = read_label(region.value("region_attributes", json::object()));
    if (out.class_label.empty()) {
      throw ViaRegionError(
              "image '" + image.filename + "' region " + std::to_string(i) + ": no class label",
              image.filename, i);
    }
    image.regions.push_back(std::move(out));
  }
  return image;
}

}  // namespace

std::optional<ObjectClass> map_label(std::string_view label)
{
  static const std::map<std::string, ObjectClass> table = {
    {"wall", ObjectClass::ShortWall},
    {"walls", ObjectClass::ShortWall},
    {"short_wall", ObjectClass::ShortWall},
    {"short_walls", ObjectClass::ShortWall},
    {"small_wall", ObjectClass::ShortWall},
    {"small_walls", ObjectClass::ShortWall},
    {"rail", ObjectClass::Railing},
    {"rails", ObjectClass::Railing},
    {"railing", ObjectClass::Railing},
    {"railings", ObjectClass::Railing},
    {"stair", ObjectClass::Stairs},
    {"stairs", ObjectClass::Stairs},
  };
  const auto it = table.find(normalize(label));
  if (it == table.end()) {
    return std::nullopt;
  }
  return it->second;
}

ViaProject parse_via(std::string_view project_text)
{
  json doc;
  try {
    doc = json::parse(project_text);
  } catch (const json::parse_error & e) {
    throw ViaParseError(std::string("malformed VIA JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) {
    throw ViaParseError("VIA project must be a JSON object", 0);
  }
  const json * images = &doc;
  if (const auto it = doc.find("_via_img_metadata"); it != doc.end()) {
    images = &*it;
    if (!images->is_object()) {
      throw ViaParseError("_via_img_metadata must be an object", 0);
    }
  }

  ViaProject project;
  for (const auto & [key, entry] : images->items()) {
    project.images.push_back(read_entry(entry, key, project));
  }
  return project;
}

ViaProject load_via(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open VIA project " + path);
  }
  std::string text{std::istreambuf_iterator<char>(in), {}};
  return parse_via(text);
}

DetectionSet to_detection_set(const AnnotatedImage & image, double confidence)
{
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw DomainError("confidence must be in [0, 1]");
  }
  DetectionSet set;
  set.image = image.filename;
  std::vector<std::string> unknown;
  for (const auto & region : image.regions) {
    const auto cls = map_label(region.class_label);
    if (!cls) {
      if (std::find(unknown.begin(), unknown.end(), region.class_label) == unknown.end()) {
        unknown.push_back(region.class_label);
      }
      continue;
    }
    Detection d;
    d.cls = *cls;
    d.confidence = confidence;
    for (std::size_t i = 0; i < region.xs.size(); ++i) {
      d.polygon.push_back({region.xs[i], region.ys[i]});
    }
    set.detections.push_back(std::move(d));
  }
  if (!unknown.empty()) {
    std::ostringstream msg;
    msg << "image '" << image.filename << "' has labels outside {short_wall, railing, stairs}:";
    for (const auto & l : unknown) {
      msg << " '" << l << "'";
    }
    throw UnmappableLabelError(msg.str(), std::move(unknown));
  }
  return set;
}

}  // namespace spotfinder::annotations
