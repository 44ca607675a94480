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
#include "spotfinder/evaluation.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <vector>

#include "spotfinder/metrics.hpp"

namespace spotfinder::metrics
{

using json = nlohmann::json;

namespace
{

json counts_json(const scoring::ClassCounts & c)
{
  return {{"short_wall", c.short_wall}, {"railing", c.railing}, {"stairs", c.stairs}, {"total", c.total()}};
}

json optional_number(const std::optional<double> & v)
{
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json evaluate_via(
  const annotations::ViaProject & truth, const std::string & images_dir,
  const detectors::DetectorBackend & backend, double min_confidence)
{
  json per_image = json::array();
  scoring::ClassCounts abs_total;
  scoring::ClassCounts signed_total;
  std::vector<bool> predicted_any;
  std::vector<bool> annotated_any;

  for (const auto & image : truth.images) {
    json entry = {{"filename", image.filename}};
    try {
      const auto path = (std::filesystem::path(images_dir) / image.filename).string();
      const Raster raster = codec::read_image(path);
      const auto pred = detectors::segment_street(raster, image.filename, backend, min_confidence);
      const auto deltas = count_match_score(pred, image);
      entry["predicted"] = counts_json(deltas.predicted);
      entry["truth"] = counts_json(deltas.truth);
      entry["signed_delta"] = counts_json(deltas.signed_delta);
      entry["absolute_delta"] = counts_json(deltas.absolute_delta);
      for (const auto c : kObjectClasses) {
        abs_total[c] += deltas.absolute_delta[c];
        signed_total[c] += deltas.signed_delta[c];
      }
      predicted_any.push_back(deltas.predicted.total() > 0);
      annotated_any.push_back(deltas.truth.total() > 0);
    } catch (const std::exception & e) {
      entry["error"] = e.what();
    }
    per_image.push_back(std::move(entry));
  }

  json report = {
    {"backend", backend.id()},
    {"min_confidence", min_confidence},
    {"images", truth.images.size()},
    {"evaluated", predicted_any.size()},
    {"warnings", truth.warnings},
    {"per_image", std::move(per_image)},
    {"absolute_delta", counts_json(abs_total)},
    {"signed_delta", counts_json(signed_total)},
    {"presence", nullptr}};

  if (!predicted_any.empty()) {
    // std::vector<bool> has no contiguous storage; copy for the span interface.
    const std::unique_ptr<bool[]> preds(new bool[predicted_any.size()]);
    const std::unique_ptr<bool[]> labels(new bool[annotated_any.size()]);
    std::copy(predicted_any.begin(), predicted_any.end(), preds.get());
    std::copy(annotated_any.begin(), annotated_any.end(), labels.get());
    const auto m = confusion({preds.get(), predicted_any.size()}, {labels.get(), annotated_any.size()});
    report["presence"] = {
      {"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn},
      {"accuracy", m.accuracy()},
      {"precision", optional_number(m.precision())},
      {"recall", optional_number(m.recall())}};
  }
  return report;
}

}  // namespace spotfinder::metrics
