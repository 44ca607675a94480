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
#include "spotfinder/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spotfinder/errors.hpp"

namespace spotfinder::preprocess
{

namespace
{

struct Tap
{
  int src;
  double weight;
};

// For each output index, the source pixels it overlaps and the overlap
// length, normalized so each output's weights sum to 1.
std::vector<std::vector<Tap>> box_taps(int in, int out)
{
  std::vector<std::vector<Tap>> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < in && s < hi; ++s) {
      const double overlap = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (overlap > 1e-12) {
        taps[o].push_back({s, overlap / scale});
      }
    }
  }
  return taps;
}

void require_size(const Raster & img, int size, const char * what)
{
  if (img.width() != size || img.height() != size) {
    throw DomainError(
            std::string(what) + " expects a " + std::to_string(size) + "x" + std::to_string(size) +
            " raster, got " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

}  // namespace

Raster resample_box(const Raster & img, int out_width, int out_height)
{
  if (img.empty() || out_width <= 0 || out_height <= 0 ||
    out_width > img.width() || out_height > img.height())
  {
    throw DomainError("box resampling only reduces a non-empty raster");
  }
  const auto xtaps = box_taps(img.width(), out_width);
  const auto ytaps = box_taps(img.height(), out_height);

  // Horizontal pass into doubles, then vertical pass with a single rounding.
  std::vector<double> horiz(static_cast<std::size_t>(out_width) * img.height() * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc[3] = {0, 0, 0};
      for (const auto & t : xtaps[x]) {
        const Rgb c = img.at(t.src, y);
        for (int ch = 0; ch < 3; ++ch) {
          acc[ch] += t.weight * c[ch];
        }
      }
      double * dst = &horiz[(static_cast<std::size_t>(y) * out_width + x) * 3];
      std::copy(acc, acc + 3, dst);
    }
  }

  Raster out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc[3] = {0, 0, 0};
      for (const auto & t : ytaps[y]) {
        const double * src = &horiz[(static_cast<std::size_t>(t.src) * out_width + x) * 3];
        for (int ch = 0; ch < 3; ++ch) {
          acc[ch] += t.weight * src[ch];
        }
      }
      Rgb c;
      for (int ch = 0; ch < 3; ++ch) {
        c[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[ch]), 0L, 255L));
      }
      out.set(x, y, c);
    }
  }
  return out;
}

Raster downscale(const Raster & img)
{
  require_size(img, kSatelliteInput, "downscale");
  return resample_box(img, kDownscaled, kDownscaled);
}

QuadrantSet split_quadrants(const Raster & img, std::string parent)
{
  require_size(img, kDownscaled, "split_quadrants");
  QuadrantSet q;
  q.parent = std::move(parent);
  q.tiles[static_cast<int>(Quadrant::TopLeft)] = img.crop(0, 0, kQuadrant, kQuadrant);
  q.tiles[static_cast<int>(Quadrant::TopRight)] = img.crop(kQuadrant, 0, kQuadrant, kQuadrant);
  q.tiles[static_cast<int>(Quadrant::BottomLeft)] = img.crop(0, kQuadrant, kQuadrant, kQuadrant);
  q.tiles[static_cast<int>(Quadrant::BottomRight)] =
    img.crop(kQuadrant, kQuadrant, kQuadrant, kQuadrant);
  return q;
}

Raster reassemble(const QuadrantSet & q)
{
  for (const auto & t : q.tiles) {
    require_size(t, kQuadrant, "reassemble");
  }
  Raster out(kDownscaled, kDownscaled);
  out.paste(q.tiles[0], 0, 0);
  out.paste(q.tiles[1], kQuadrant, 0);
  out.paste(q.tiles[2], 0, kQuadrant);
  out.paste(q.tiles[3], kQuadrant, kQuadrant);
  return out;
}

}  // namespace spotfinder::preprocess
