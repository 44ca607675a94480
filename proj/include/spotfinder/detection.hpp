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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spotfinder
{

/// The closed set of street-level objects the pipeline counts.
enum class ObjectClass { ShortWall, Railing, Stairs };

inline constexpr std::array<ObjectClass, 3> kObjectClasses = {
  ObjectClass::ShortWall, ObjectClass::Railing, ObjectClass::Stairs};

std::string_view to_string(ObjectClass c);
/// Exact canonical names only ("short_wall", "railing", "stairs").
std::optional<ObjectClass> parse_object_class(std::string_view name);

struct Vertex
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vertex &, const Vertex &) = default;
};

struct Detection
{
  ObjectClass cls = ObjectClass::ShortWall;
  double confidence = 0.0;
  std::vector<Vertex> polygon;

  friend bool operator==(const Detection &, const Detection &) = default;
};

struct DetectionSet
{
  std::string image;  ///< provenance: cache key or annotation filename
  int width = 0;      ///< 0 when the source dimensions are unknown
  int height = 0;
  std::vector<Detection> detections;

  friend bool operator==(const DetectionSet &, const DetectionSet &) = default;
};

struct SatelliteScore
{
  std::array<double, 4> quadrant_probs{};
  double max_prob = 0.0;

  friend bool operator==(const SatelliteScore &, const SatelliteScore &) = default;
};

}  // namespace spotfinder
