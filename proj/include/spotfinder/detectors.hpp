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
 * @file detectors.hpp
 * @brief Satellite and street-view inference backends and their contracts.
 *
 * A backend turns a 256x256 satellite quadrant into a probability and a
 * street-view image into class-labelled polygons. Three implementations are
 * provided: fixture replay (VIA ground truth), a deterministic edge-density
 * heuristic, and an external process exchanging JSON files.
 */

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spotfinder/annotations.hpp"
#include "spotfinder/detection.hpp"
#include "spotfinder/preprocess.hpp"
#include "spotfinder/raster.hpp"

namespace spotfinder::detectors
{

inline constexpr double kDefaultMinConfidence = 0.75;
inline constexpr int kMaxStreetSize = 640;

class DetectorBackend
{
public:
  virtual ~DetectorBackend() = default;

  /// Stable identity; equal ids on equal inputs must give equal outputs.
  virtual std::string id() const = 0;
  /// False when calls must be serialized by the caller.
  virtual bool shareable() const = 0;

  /// `ref` names the tile (source key plus quadrant suffix, e.g. "<key>#q2").
  virtual double classify_quadrant(const Raster & tile, const std::string & ref) const = 0;
  /// `ref` names the image (cache key, or file name for annotation replay).
  virtual std::vector<Detection> segment_street(
    const Raster & image,
    const std::string & ref) const = 0;
};

/// Runs the backend on each quadrant; the parent request is carried into errors.
SatelliteScore classify_tile(const preprocess::QuadrantSet & quadrants, const DetectorBackend & backend);

/// Drops detections below `min_confidence` (the floor itself survives).
DetectionSet filter_by_confidence(DetectionSet set, double min_confidence);

/// Backend inference followed by validation and the confidence floor.
DetectionSet segment_street(
  const Raster & image, const std::string & ref,
  const DetectorBackend & backend,
  double min_confidence = kDefaultMinConfidence);

/// Fraction of pixels whose forward-difference luminance gradient exceeds 32,
/// scaled so that 15% edge pixels saturates at 1.
double heuristic_satellite_prob(const Raster & tile);

/// Offline stand-in for trained models.
class HeuristicBackend : public DetectorBackend
{
public:
  std::string id() const override {return "heuristic-v1";}
  bool shareable() const override {return true;}
  double classify_quadrant(const Raster & tile, const std::string & ref) const override;
  /// Tiles the image into 64x64 cells; each cell with enough edge pixels
  /// becomes one detection whose class follows the dominant edge direction.
  std::vector<Detection> segment_street(
    const Raster & image,
    const std::string & ref) const override;
};

/**
 * @brief Replays VIA annotations as detections.
 *
 * Street images are matched by file name (`<ref>.png` or `<ref>`). Quadrant
 * probabilities come from an optional `ref -> probability` table and fall
 * back to the heuristic when a tile is not listed.
 */
class FixtureBackend : public DetectorBackend
{
public:
  explicit FixtureBackend(
    std::vector<annotations::AnnotatedImage> images,
    std::map<std::string, double> quadrant_probs = {},
    double confidence = 1.0);

  static std::unique_ptr<FixtureBackend> from_files(
    const std::string & via_path,
    const std::string & quadrant_probs_path = {});

  std::string id() const override {return "fixture";}
  bool shareable() const override {return true;}
  double classify_quadrant(const Raster & tile, const std::string & ref) const override;
  std::vector<Detection> segment_street(
    const Raster & image,
    const std::string & ref) const override;

private:
  std::map<std::string, DetectionSet> by_file_;
  std::map<std::string, double> quadrant_probs_;
};

/**
 * @brief Delegates inference to an external program.
 *
 * For each call the backend writes the raster as PNG plus a request document
 * and runs `<command> <request.json> <response.json>`. See
 * docs/detector-protocol.md for the schema.
 */
class ExternalProcessBackend : public DetectorBackend
{
public:
  static constexpr const char * kSchema = "spotfinder.detector/1";

  ExternalProcessBackend(std::string command, std::string work_dir);

  std::string id() const override {return "external:" + command_;}
  bool shareable() const override {return false;}
  double classify_quadrant(const Raster & tile, const std::string & ref) const override;
  std::vector<Detection> segment_street(
    const Raster & image,
    const std::string & ref) const override;

private:
  std::string invoke(const Raster & image, const std::string & ref, const char * kind) const;

  std::string command_;
  std::string work_dir_;
  mutable std::atomic<unsigned long> counter_{0};
};

}  // namespace spotfinder::detectors
