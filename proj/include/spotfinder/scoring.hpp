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
#include <string_view>

#include "spotfinder/detection.hpp"

namespace spotfinder::scoring
{

inline constexpr int kDefaultThreshold = 20;
inline constexpr int kHeadings = 4;

struct ClassCounts
{
  int short_wall = 0;
  int railing = 0;
  int stairs = 0;

  int total() const {return short_wall + railing + stairs;}
  int & operator[](ObjectClass c);
  int operator[](ObjectClass c) const;

  friend bool operator==(const ClassCounts &, const ClassCounts &) = default;
};

/// How satellite and street evidence are combined into one probability.
enum class Mode
{
  StreetOnly,  ///< satellite evidence ignored
  Prefilter,   ///< satellite score gates the street decision
  Weighted,    ///< convex blend of both probabilities
};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

struct ScoringConfig
{
  int threshold = kDefaultThreshold;  ///< class-hit count T
  double sat_threshold = 0.5;         ///< prefilter gate on max quadrant probability
  double sat_weight = 0.5;            ///< satellite share in Weighted mode
  Mode mode = Mode::StreetOnly;
};

struct SpotScore
{
  ClassCounts counts;
  std::optional<SatelliteScore> sat;
  double probability = 0.0;
  bool positive = false;
  Mode mode = Mode::StreetOnly;

  friend bool operator==(const SpotScore &, const SpotScore &) = default;
};

/// Per-class totals over the four heading sets. No deduplication across headings.
ClassCounts count_hits(std::span<const DetectionSet> heading_sets);

/// True iff strictly more than `threshold` objects were found.
bool decide(const ClassCounts & counts, int threshold = kDefaultThreshold);

/// min(1, total / 2T): crosses 0.5 exactly at the decision boundary.
double street_probability(int total, int threshold);

SpotScore combine(
  const std::optional<SatelliteScore> & sat, const ClassCounts & counts,
  const ScoringConfig & config);

}  // namespace spotfinder::scoring
