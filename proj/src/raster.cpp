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
#include "spotfinder/raster.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "spotfinder/errors.hpp"

namespace spotfinder
{

Raster::Raster(int width, int height, Rgb fill)
: width_(width), height_(height)
{
  if (width < 0 || height < 0) {
    throw DomainError("raster dimensions must be non-negative");
  }
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

Raster::Raster(int width, int height, std::vector<std::uint8_t> rgb)
: width_(width), height_(height), data_(std::move(rgb))
{
  if (width < 0 || height < 0 ||
    data_.size() != static_cast<std::size_t>(width) * height * 3)
  {
    throw DomainError("raster buffer does not match its dimensions");
  }
}

Raster Raster::crop(int x0, int y0, int w, int h) const
{
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_) {
    throw DomainError("crop window outside the raster");
  }
  Raster out(w, h);
  const std::size_t row_bytes = static_cast<std::size_t>(w) * 3;
  for (int y = 0; y < h; ++y) {
    std::memcpy(&out.data_[out.index(0, y)], &data_[index(x0, y0 + y)], row_bytes);
  }
  return out;
}

void Raster::paste(const Raster & src, int x0, int y0)
{
  if (x0 < 0 || y0 < 0 || x0 + src.width_ > width_ || y0 + src.height_ > height_) {
    throw DomainError("paste window outside the raster");
  }
  const std::size_t row_bytes = static_cast<std::size_t>(src.width_) * 3;
  for (int y = 0; y < src.height_; ++y) {
    std::memcpy(&data_[index(x0, y0 + y)], &src.data_[src.index(0, y)], row_bytes);
  }
}

double luminance(Rgb c)
{
  return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

namespace codec
{

namespace
{

bool is_png(std::span<const std::uint8_t> d)
{
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return d.size() >= 8 && std::memcmp(d.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> d)
{
  return d.size() >= 3 && d[0] == 0xff && d[1] == 0xd8 && d[2] == 0xff;
}

Raster decode_png(std::span<const std::uint8_t> data)
{
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    throw DomainError(std::string("PNG decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DomainError("PNG decode failed: " + msg);
  }
  return Raster(static_cast<int>(image.width), static_cast<int>(image.height), std::move(buf));
}

struct JpegErrorManager
{
  jpeg_error_mgr base;
  char message[JMSG_LENGTH_MAX];
};

[[noreturn]] void jpeg_throw(j_common_ptr info)
{
  auto * err = reinterpret_cast<JpegErrorManager *>(info->err);
  (*info->err->format_message)(info, err->message);
  throw DomainError(std::string("JPEG decode failed: ") + err->message);
}

Raster decode_jpeg(std::span<const std::uint8_t> data)
{
  jpeg_decompress_struct info;
  JpegErrorManager err;
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_throw;
  jpeg_create_decompress(&info);
  std::unique_ptr<jpeg_decompress_struct, void (*)(jpeg_decompress_struct *)> guard(
    &info, [](jpeg_decompress_struct * p) {jpeg_destroy_decompress(p);});

  jpeg_mem_src(&info, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  const int w = static_cast<int>(info.output_width);
  const int h = static_cast<int>(info.output_height);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * 3);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = &buf[static_cast<std::size_t>(info.output_scanline) * w * 3];
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  return Raster(w, h, std::move(buf));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster & img)
{
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  // Cache files favour write speed over size.
  image.flags = PNG_IMAGE_FLAG_FAST;

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.bytes().data(), 0, nullptr)) {
    throw DomainError(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.bytes().data(), 0, nullptr)) {
    throw DomainError(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Raster decode_image(std::span<const std::uint8_t> data)
{
  if (is_png(data)) {
    return decode_png(data);
  }
  if (is_jpeg(data)) {
    return decode_jpeg(data);
  }
  throw DomainError("unrecognized image encoding");
}

Raster read_image(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open image " + path);
  }
  std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(in), {}};
  return decode_image(data);
}

void write_png(const std::string & path, const Raster & img)
{
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FatalError("cannot write image " + path);
  }
}

}  // namespace codec

}  // namespace spotfinder
