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
 * @file annotations.hpp
 * @brief Reader for VGG Image Annotator (VIA 2.x) project exports.
 *
 * Both the bare image map (`{"<filename><size>": {...}}`) and a full project
 * file carrying it under `_via_img_metadata` are accepted. Only polygon
 * regions are kept; any other shape produces a warning.
 */

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spotfinder/detection.hpp"
#include "spotfinder/errors.hpp"

namespace spotfinder::annotations
{

struct AnnotatedRegion
{
  std::vector<double> xs;
  std::vector<double> ys;
  std::string class_label;

  friend bool operator==(const AnnotatedRegion &, const AnnotatedRegion &) = default;
};

struct AnnotatedImage
{
  std::string filename;
  std::vector<AnnotatedRegion> regions;

  friend bool operator==(const AnnotatedImage &, const AnnotatedImage &) = default;
};

struct ViaProject
{
  std::vector<AnnotatedImage> images;
  std::vector<std::string> warnings;
};

/// The document is not JSON, or not shaped like a VIA export.
class ViaParseError : public Error
{
public:
  ViaParseError(const std::string & what, std::size_t byte_offset)
  : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const {return byte_offset_;}

private:
  std::size_t byte_offset_;
};

/// A single region is unusable; names the image it belongs to.
class ViaRegionError : public Error
{
public:
  ViaRegionError(const std::string & what, std::string image, std::size_t region)
  : Error(what), image_(std::move(image)), region_(region) {}
  const std::string & image() const {return image_;}
  std::size_t region() const {return region_;}

private:
  std::string image_;
  std::size_t region_;
};

class UnmappableLabelError : public Error
{
public:
  UnmappableLabelError(const std::string & what, std::vector<std::string> labels)
  : Error(what), labels_(std::move(labels)) {}
  const std::vector<std::string> & labels() const {return labels_;}

private:
  std::vector<std::string> labels_;
};

/// Case-insensitive mapping of annotator vocabulary onto the closed class set.
std::optional<ObjectClass> map_label(std::string_view label);

ViaProject parse_via(std::string_view project_text);
ViaProject load_via(const std::string & path);

/// One detection per region, all at `confidence`.
DetectionSet to_detection_set(const AnnotatedImage & image, double confidence = 1.0);

}  // namespace spotfinder::annotations
