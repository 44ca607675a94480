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
#include "spotfinder/metrics.hpp"

#include <cstdlib>
#include <string>

#include "spotfinder/errors.hpp"

namespace spotfinder::metrics
{

double ConfusionMatrix::accuracy() const
{
  const long n = total();
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::precision() const
{
  if (tp + fp == 0) {
    return std::nullopt;
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionMatrix::recall() const
{
  if (tp + fn == 0) {
    return std::nullopt;
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

ConfusionMatrix confusion(std::span<const bool> preds, std::span<const bool> labels)
{
  if (preds.size() != labels.size()) {
    throw DomainError(
            "prediction and label vectors differ in length (" + std::to_string(preds.size()) +
            " vs " + std::to_string(labels.size()) + ")");
  }
  if (preds.empty()) {
    throw DomainError("confusion matrix needs at least one sample");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i]) {
      labels[i] ? ++m.tp : ++m.fp;
    } else {
      labels[i] ? ++m.fn : ++m.tn;
    }
  }
  return m;
}

CountDeltas count_match_score(const DetectionSet & pred, const annotations::AnnotatedImage & truth)
{
  if (pred.image != truth.filename && pred.image + ".png" != truth.filename) {
    throw DomainError(
            "detections for '" + pred.image + "' compared against annotations of '" +
            truth.filename + "'");
  }
  CountDeltas out;
  for (const auto & d : pred.detections) {
    ++out.predicted[d.cls];
  }
  for (const auto & region : truth.regions) {
    const auto cls = annotations::map_label(region.class_label);
    if (!cls) {
      throw annotations::UnmappableLabelError(
              "ground truth label '" + region.class_label + "' is outside the class set",
              {region.class_label});
    }
    ++out.truth[*cls];
  }
  for (const auto c : kObjectClasses) {
    out.signed_delta[c] = out.predicted[c] - out.truth[c];
    out.absolute_delta[c] = std::abs(out.signed_delta[c]);
  }
  return out;
}

}  // namespace spotfinder::metrics
