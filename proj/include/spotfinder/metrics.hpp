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

#include <optional>
#include <span>

#include "spotfinder/annotations.hpp"
#include "spotfinder/detection.hpp"
#include "spotfinder/scoring.hpp"

namespace spotfinder::metrics
{

struct ConfusionMatrix
{
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const {return tp + fp + tn + fn;}
  double accuracy() const;
  /// Undefined (nullopt) when nothing was predicted positive.
  std::optional<double> precision() const;
  /// Undefined (nullopt) when there are no positive labels.
  std::optional<double> recall() const;

  friend bool operator==(const ConfusionMatrix &, const ConfusionMatrix &) = default;
};

ConfusionMatrix confusion(std::span<const bool> preds, std::span<const bool> labels);

/// Per-class comparison of detection counts against ground truth.
struct CountDeltas
{
  scoring::ClassCounts predicted;
  scoring::ClassCounts truth;
  scoring::ClassCounts signed_delta;    ///< predicted - truth
  scoring::ClassCounts absolute_delta;  ///< |predicted - truth|
};

/// `pred.image` must name `truth.filename`; the ".png" suffix is optional.
CountDeltas count_match_score(const DetectionSet & pred, const annotations::AnnotatedImage & truth);

}  // namespace spotfinder::metrics
