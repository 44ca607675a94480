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
#include <string>

#include "spotfinder/raster.hpp"

namespace spotfinder::preprocess
{

inline constexpr int kSatelliteInput = 640;
inline constexpr int kDownscaled = 512;
inline constexpr int kQuadrant = 256;

enum class Quadrant { TopLeft = 0, TopRight = 1, BottomLeft = 2, BottomRight = 3 };

/// Four classifier inputs cut from one downscaled satellite tile.
struct QuadrantSet
{
  std::array<Raster, 4> tiles;  ///< indexed by Quadrant
  std::string parent;           ///< canonical request of the source image
};

/// Area-weighted (box) resampling to an arbitrary smaller size.
Raster resample_box(const Raster & img, int out_width, int out_height);

/// 640x640 -> 512x512 box downscale.
Raster downscale(const Raster & img);

/// Splits a 512x512 raster into its four 256x256 quadrants.
QuadrantSet split_quadrants(const Raster & img, std::string parent = {});

/// Inverse of split_quadrants.
Raster reassemble(const QuadrantSet & q);

}  // namespace spotfinder::preprocess
