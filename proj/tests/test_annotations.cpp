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

#include <random>

#include "spotfinder/annotations.hpp"
#include "support.hpp"

using namespace spotfinder;
namespace ann = spotfinder::annotations;

namespace
{

std::string via_path(const std::string & name)
{
  return testing::data_dir() + "/via/" + name;
}

}  // namespace

TEST_SUITE("annotations")
{
  TEST_CASE("empty project")
  {
    CHECK(ann::parse_via("{}").images.empty());
    CHECK(ann::parse_via(R"({"_via_img_metadata": {}})").images.empty());
  }

  TEST_CASE("two-image fixture has 3 and 4 regions")
  {
    const auto p = ann::load_via(via_path("two_images.json"));
    REQUIRE(p.images.size() == 2);
    CHECK(p.images[0].filename == "street_a.png");
    CHECK(p.images[0].regions.size() == 3);
    CHECK(p.images[1].filename == "street_b.png");
    CHECK(p.images[1].regions.size() == 4);
    CHECK(p.warnings.empty());
    CHECK(p.images[0].regions[1].class_label == "Railing");
    CHECK(p.images[0].regions[2].class_label == "stairs");
    CHECK(p.images[0].regions[2].xs == std::vector<double>{450, 600, 600, 520, 450});

    const auto a = ann::to_detection_set(p.images[0]);
    const auto b = ann::to_detection_set(p.images[1]);
    CHECK(a.detections.size() + b.detections.size() == 7);
    for (const auto & d : b.detections) {
      CHECK(d.confidence == 1.0);
    }
    CHECK(b.detections[0].cls == ObjectClass::ShortWall);
    CHECK(b.detections[1].cls == ObjectClass::Stairs);
    CHECK(b.detections[1].polygon == std::vector<Vertex>{{150, 200}, {300, 200}, {225, 300}});
  }

  TEST_CASE("degenerate polygons are rejected with the image named")
  {
    try {
      ann::load_via(via_path("degenerate_two_points.json"));
      FAIL("expected ViaRegionError");
    } catch (const ann::ViaRegionError & e) {
      CHECK(e.image() == "street_c.png");
      CHECK(e.region() == 1);
    }
    try {
      ann::load_via(via_path("degenerate_arity.json"));
      FAIL("expected ViaRegionError");
    } catch (const ann::ViaRegionError & e) {
      CHECK(e.image() == "street_d.png");
      CHECK(e.region() == 0);
    }
  }

  TEST_CASE("malformed documents")
  {
    try {
      ann::parse_via(R"({"a.png1": {"filename": "a.png", "regions": [)");
      FAIL("expected ViaParseError");
    } catch (const ann::ViaParseError & e) {
      CHECK(e.byte_offset() > 0);
    }
    CHECK_THROWS_AS(ann::parse_via("[1, 2]"), ann::ViaParseError);
    CHECK_THROWS_AS(ann::parse_via(R"({"a": {"regions": []}})"), ann::ViaParseError);
    CHECK_THROWS_AS(ann::load_via(via_path("no_such_file.json")), Error);
  }

  TEST_CASE("non-polygon shapes are skipped with a warning")
  {
    const auto p = ann::load_via(via_path("project_with_rect.json"));
    REQUIRE(p.images.size() == 1);
    CHECK(p.images[0].regions.size() == 1);
    REQUIRE(p.warnings.size() == 1);
    CHECK(p.warnings[0].find("rect") != std::string::npos);
    CHECK(ann::to_detection_set(p.images[0]).detections[0].cls == ObjectClass::Railing);
  }

  TEST_CASE("label mapping")
  {
    CHECK(ann::map_label("wall") == ObjectClass::ShortWall);
    CHECK(ann::map_label("Short-Wall") == ObjectClass::ShortWall);
    CHECK(ann::map_label("small walls") == ObjectClass::ShortWall);
    CHECK(ann::map_label("RAILING") == ObjectClass::Railing);
    CHECK(ann::map_label("rails") == ObjectClass::Railing);
    CHECK(ann::map_label("Stair") == ObjectClass::Stairs);
    CHECK_FALSE(ann::map_label("Bench").has_value());
    CHECK_FALSE(ann::map_label("").has_value());
  }

  TEST_CASE("unmappable label lists the label")
  {
    const auto p = ann::load_via(via_path("bench_label.json"));
    try {
      ann::to_detection_set(p.images[0]);
      FAIL("expected UnmappableLabelError");
    } catch (const ann::UnmappableLabelError & e) {
      CHECK(e.labels() == std::vector<std::string>{"Bench"});
    }
  }

  TEST_CASE("empty image converts to an empty set")
  {
    const auto s = ann::to_detection_set({"x.png", {}}, 0.5);
    CHECK(s.detections.empty());
    CHECK(s.image == "x.png");
  }

  TEST_CASE("parse, serialize, parse is stable")
  {
    const auto first = ann::load_via(via_path("two_images.json"));
    const auto second = ann::parse_via(testing::serialize_via(first).dump());
    CHECK(second.images == first.images);
    const auto third = ann::parse_via(testing::serialize_via(second).dump(2));
    CHECK(third.images == second.images);

    std::mt19937 rng(8);
    const char * labels[] = {"wall", "Railing", "stairs", "short wall"};
    for (int trial = 0; trial < 50; ++trial) {
      ann::ViaProject p;
      const int n_img = 1 + rng() % 4;
      for (int i = 0; i < n_img; ++i) {
        ann::AnnotatedImage img{"img" + std::to_string(i) + ".png", {}};
        const int n_reg = rng() % 6;
        for (int r = 0; r < n_reg; ++r) {
          ann::AnnotatedRegion reg;
          const int n_v = 3 + rng() % 5;
          for (int v = 0; v < n_v; ++v) {
            reg.xs.push_back(rng() % 640);
            reg.ys.push_back(rng() % 640);
          }
          reg.class_label = labels[rng() % 4];
          img.regions.push_back(reg);
        }
        p.images.push_back(img);
      }
      const auto once = ann::parse_via(testing::serialize_via(p).dump());
      CHECK(once.images == p.images);
      CHECK(ann::parse_via(testing::serialize_via(once).dump()).images == once.images);
      // Region count conservation.
      std::size_t regions = 0;
      std::size_t detections = 0;
      for (const auto & img : once.images) {
        regions += img.regions.size();
        detections += ann::to_detection_set(img).detections.size();
      }
      CHECK(detections == regions);
    }
  }
}
