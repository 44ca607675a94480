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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spotfinder
{

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB image, row-major, y grows downwards.
class Raster
{
public:
  Raster() = default;
  Raster(int width, int height, Rgb fill = {0, 0, 0});
  /// Takes ownership of an interleaved RGB buffer of width*height*3 bytes.
  Raster(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const {return width_;}
  int height() const {return height_;}
  bool empty() const {return width_ == 0 || height_ == 0;}

  Rgb at(int x, int y) const
  {
    const auto i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c)
  {
    const auto i = index(x, y);
    data_[i] = c[0];
    data_[i + 1] = c[1];
    data_[i + 2] = c[2];
  }

  std::span<const std::uint8_t> bytes() const {return data_;}
  std::span<std::uint8_t> bytes() {return data_;}

  /// Copy of the w*h window whose top-left corner is (x0, y0).
  Raster crop(int x0, int y0, int w, int h) const;
  /// Writes `src` with its top-left corner at (x0, y0).
  void paste(const Raster & src, int x0, int y0);

  friend bool operator==(const Raster &, const Raster &) = default;

private:
  std::size_t index(int x, int y) const
  {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// ITU-R BT.601 luma of one pixel, in [0, 255].
double luminance(Rgb c);

namespace codec
{

std::vector<std::uint8_t> encode_png(const Raster & img);
/// Decodes PNG or JPEG, chosen by the leading signature bytes.
Raster decode_image(std::span<const std::uint8_t> data);

Raster read_image(const std::string & path);
void write_png(const std::string & path, const Raster & img);

}  // namespace codec

}  // namespace spotfinder
