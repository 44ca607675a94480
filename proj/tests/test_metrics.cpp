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

#include <algorithm>
#include <numeric>
#include <random>

#include "spotfinder/annotations.hpp"
#include "spotfinder/errors.hpp"
#include "spotfinder/evaluation.hpp"
#include "spotfinder/metrics.hpp"
#include "support.hpp"

using namespace spotfinder;
using doctest::Approx;
namespace m = spotfinder::metrics;

namespace
{

// std::vector<bool> is bit-packed, so the span interface gets plain arrays.
m::ConfusionMatrix conf(const std::vector<int> & preds, const std::vector<int> & labels)
{
  std::unique_ptr<bool[]> p(new bool[preds.size()]);
  std::unique_ptr<bool[]> l(new bool[labels.size()]);
  std::transform(preds.begin(), preds.end(), p.get(), [](int v) {return v != 0;});
  std::transform(labels.begin(), labels.end(), l.get(), [](int v) {return v != 0;});
  return m::confusion({p.get(), preds.size()}, {l.get(), labels.size()});
}

annotations::AnnotatedRegion tri(const char * label)
{
  return {{0, 10, 10}, {0, 0, 10}, label};
}

}  // namespace

TEST_SUITE("metrics")
{
  TEST_CASE("confusion basics")
  {
    const auto all = conf({1, 1, 1, 1}, {1, 1, 1, 1});
    CHECK(all.tp == 4);
    CHECK(all.accuracy() == 1.0);
    CHECK(all.precision() == 1.0);

    const auto inverse = conf({1, 0, 1, 0}, {0, 1, 0, 1});
    CHECK(inverse.accuracy() == 0.0);

    // Ten samples with eight agreements.
    const auto toy = conf({1, 1, 1, 0, 0, 0, 1, 0, 1, 0}, {1, 1, 1, 0, 0, 0, 0, 1, 1, 0});
    CHECK(toy.accuracy() == Approx(0.8));
    CHECK(toy.tp == 4);
    CHECK(toy.fp == 1);
    CHECK(toy.fn == 1);
    CHECK(toy.tn == 4);

    const auto none = conf({0, 0}, {0, 1});
    CHECK_FALSE(none.precision().has_value());
    CHECK(none.recall() == 0.0);
    CHECK_FALSE(conf({0, 0}, {0, 0}).recall().has_value());

    CHECK_THROWS_AS(conf({1}, {1, 0}), DomainError);
    CHECK_THROWS_AS(conf({}, {}), DomainError);
  }

  TEST_CASE("confusion sums to length and accuracy ignores permutation")
  {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng() % 50;
      std::vector<int> p(n);
      std::vector<int> l(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = rng() % 2;
        l[i] = rng() % 2;
      }
      const auto a = conf(p, l);
      CHECK(a.total() == static_cast<long>(n));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      std::vector<int> pp(n);
      std::vector<int> ll(n);
      for (std::size_t i = 0; i < n; ++i) {
        pp[i] = p[idx[i]];
        ll[i] = l[idx[i]];
      }
      CHECK(conf(pp, ll) == a);
      if (a.precision()) {
        CHECK(*a.precision() >= 0.0);
        CHECK(*a.precision() <= 1.0);
      }
    }
  }

  TEST_CASE("count deltas")
  {
    const annotations::AnnotatedImage truth{
      "a.png", {tri("wall"), tri("rail"), tri("stairs"), tri("stairs"), tri("railing")}};
    const auto replay = annotations::to_detection_set(truth);
    const auto same = m::count_match_score(replay, truth);
    CHECK(same.absolute_delta == scoring::ClassCounts{});
    CHECK(same.truth.total() == 5);

    DetectionSet empty;
    empty.image = "a";
    const auto missing = m::count_match_score(empty, truth);
    CHECK(missing.absolute_delta.total() == 5);
    CHECK(missing.signed_delta.total() == -5);

    auto extra = replay;
    extra.detections.push_back(testing::box(ObjectClass::Railing, 0.9));
    const auto plus = m::count_match_score(extra, truth);
    CHECK(plus.signed_delta.railing == 1);
    CHECK(plus.signed_delta.short_wall == 0);
    CHECK(plus.absolute_delta.total() == 1);

    DetectionSet other;
    other.image = "b.png";
    CHECK_THROWS_AS(m::count_match_score(other, truth), DomainError);
  }

  TEST_CASE("evaluation report over the two-image fixture")
  {
    testing::TempDir tmp;
    codec::write_png(tmp.str("street_a.png"), Raster(640, 480, Rgb{100, 100, 100}));
    codec::write_png(tmp.str("street_b.png"), Raster(640, 480, Rgb{100, 100, 100}));
    const auto truth = annotations::load_via(testing::data_dir() + "/via/two_images.json");

    auto fixture = detectors::FixtureBackend::from_files(testing::data_dir() + "/via/two_images.json");
    const auto exact = m::evaluate_via(truth, tmp.str(), *fixture);
    CHECK(exact["evaluated"] == 2);
    CHECK(exact["absolute_delta"]["total"] == 0);
    CHECK(exact["presence"]["tp"] == 2);
    CHECK(exact["backend"] == "fixture");

    detectors::HeuristicBackend flat;
    const auto blind = m::evaluate_via(truth, tmp.str(), flat);
    CHECK(blind["absolute_delta"]["total"] == 7);
    CHECK(blind["signed_delta"]["total"] == -7);
    CHECK(blind["presence"]["fn"] == 2);

    std::filesystem::remove(tmp.path() / "street_b.png");
    const auto partial = m::evaluate_via(truth, tmp.str(), *fixture);
    CHECK(partial["evaluated"] == 1);
    CHECK(partial["per_image"][1].contains("error"));
  }
}
