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

#include <doctest.h>

#include <cstdlib>
#include <random>

#include "spotfinder/errors.hpp"
#include "spotfinder/preprocess.hpp"
#include "support.hpp"

using namespace spotfinder;
namespace pp = spotfinder::preprocess;

namespace
{

std::array<double, 3> channel_means(const Raster & img)
{
  std::array<double, 3> sum{};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto c = img.at(x, y);
      for (int k = 0; k < 3; ++k) {
        sum[k] += c[k];
      }
    }
  }
  for (auto & s : sum) {
    s /= static_cast<double>(img.width()) * img.height();
  }
  return sum;
}

}  // namespace

TEST_SUITE("preprocess")
{
  TEST_CASE("downscale keeps a constant image constant")
  {
    const Raster in(640, 640, Rgb{17, 130, 251});
    const Raster out = pp::downscale(in);
    CHECK(out == Raster(512, 512, Rgb{17, 130, 251}));
  }

  TEST_CASE("downscale preserves channel means within one level")
  {
    std::mt19937 rng(11);
    for (int i = 0; i < 3; ++i) {
      const Raster in = testing::random_raster(640, 640, rng);
      const auto a = channel_means(in);
      const auto b = channel_means(pp::downscale(in));
      for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(a[k] - b[k]) <= 1.0);
      }
    }
  }

  TEST_CASE("dimension contracts")
  {
    CHECK_THROWS_AS(pp::downscale(Raster(512, 512)), DomainError);
    CHECK_THROWS_AS(pp::downscale(Raster(640, 639)), DomainError);
    CHECK_THROWS_AS(pp::split_quadrants(Raster(640, 640)), DomainError);
    CHECK_THROWS_AS(pp::split_quadrants(Raster(512, 511)), DomainError);
    CHECK_THROWS_AS(pp::resample_box(Raster(10, 10), 0, 5), DomainError);
  }

  TEST_CASE("four-colour blocks split in declared order")
  {
    const Rgb colors[4] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 0}};
    Raster img(512, 512);
    for (int y = 0; y < 512; ++y) {
      for (int x = 0; x < 512; ++x) {
        img.set(x, y, colors[(y >= 256 ? 2 : 0) + (x >= 256 ? 1 : 0)]);
      }
    }
    const auto q = pp::split_quadrants(img, "parent-request");
    CHECK(q.parent == "parent-request");
    for (int i = 0; i < 4; ++i) {
      CHECK(q.tiles[i] == Raster(256, 256, colors[i]));
    }
  }

  TEST_CASE("single pixel lands in the bottom-left tile")
  {
    Raster img(512, 512);
    img.set(10, 300, {255, 255, 255});
    const auto q = pp::split_quadrants(img);
    Raster expected(256, 256);
    expected.set(10, 44, {255, 255, 255});
    CHECK(q.tiles[static_cast<int>(pp::Quadrant::BottomLeft)] == expected);
    for (auto k : {pp::Quadrant::TopLeft, pp::Quadrant::TopRight, pp::Quadrant::BottomRight}) {
      CHECK(q.tiles[static_cast<int>(k)] == Raster(256, 256));
    }
  }

  TEST_CASE("split then reassemble is the identity")
  {
    std::mt19937 rng(5);
    for (int i = 0; i < 5; ++i) {
      const Raster img = testing::random_raster(512, 512, rng);
      CHECK(pp::reassemble(pp::split_quadrants(img)) == img);
    }
  }

  TEST_CASE("downscale commutes with splitting within one level")
  {
    std::mt19937 rng(9);
    for (int i = 0; i < 3; ++i) {
      const Raster img = testing::random_raster(640, 640, rng);
      const auto whole = pp::split_quadrants(pp::downscale(img));
      for (int k = 0; k < 4; ++k) {
        const Raster part = img.crop((k % 2) * 320, (k / 2) * 320, 320, 320);
        const Raster small = pp::resample_box(part, 256, 256);
        const auto a = whole.tiles[k].bytes();
        const auto b = small.bytes();
        REQUIRE(a.size() == b.size());
        int worst = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
          worst = std::max(worst, std::abs(int(a[j]) - int(b[j])));
        }
        CHECK(worst <= 1);
      }
    }
  }

  TEST_CASE("codec round trip")
  {
    std::mt19937 rng(1);
    const Raster img = testing::random_raster(33, 17, rng);
    CHECK(codec::decode_image(codec::encode_png(img)) == img);
    const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK_THROWS_AS(codec::decode_image(junk), Error);
  }
}
