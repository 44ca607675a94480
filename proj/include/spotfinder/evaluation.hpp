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

#include <string>

#include <nlohmann/json.hpp>

#include "spotfinder/annotations.hpp"
#include "spotfinder/detectors.hpp"

namespace spotfinder::metrics
{

/**
 * @brief Runs `backend` on every annotated image and compares counts.
 *
 * Images are read from `images_dir/<filename>`. The report holds per-image
 * count deltas, summed absolute deltas per class, and a presence confusion
 * matrix (any detection vs. any annotated region). Unreadable images are
 * listed with their error instead of aborting the evaluation.
 */
nlohmann::json evaluate_via(
  const annotations::ViaProject & truth, const std::string & images_dir,
  const detectors::DetectorBackend & backend,
  double min_confidence = detectors::kDefaultMinConfidence);

}  // namespace spotfinder::metrics
