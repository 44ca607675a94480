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
#include "spotfinder/scoring.hpp"

#include <algorithm>
#include <string>

#include "spotfinder/errors.hpp"

namespace spotfinder::scoring
{

int & ClassCounts::operator[](ObjectClass c)
{
  switch (c) {
    case ObjectClass::ShortWall: return short_wall;
    case ObjectClass::Railing: return railing;
    case ObjectClass::Stairs: return stairs;
  }
  throw DomainError("unknown object class");
}

int ClassCounts::operator[](ObjectClass c) const
{
  return const_cast<ClassCounts &>(*this)[c];
}

std::string_view to_string(Mode m)
{
  switch (m) {
    case Mode::StreetOnly: return "street_only";
    case Mode::Prefilter: return "prefilter";
    case Mode::Weighted: return "weighted";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name)
{
  for (const auto m : {Mode::StreetOnly, Mode::Prefilter, Mode::Weighted}) {
    if (to_string(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

ClassCounts count_hits(std::span<const DetectionSet> heading_sets)
{
  if (heading_sets.size() != kHeadings) {
    throw DomainError(
            "count_hits expects one detection set per heading (4), got " +
            std::to_string(heading_sets.size()));
  }
  ClassCounts counts;
  for (const auto & set : heading_sets) {
    for (const auto & d : set.detections) {
      ++counts[d.cls];
    }
  }
  return counts;
}

bool decide(const ClassCounts & counts, int threshold)
{
  if (threshold < 0) {
    throw DomainError("threshold must be non-negative");
  }
  return counts.total() > threshold;
}

double street_probability(int total, int threshold)
{
  if (threshold <= 0) {
    throw DomainError("threshold must be positive");
  }
  return std::min(1.0, static_cast<double>(total) / (2.0 * threshold));
}

SpotScore combine(
  const std::optional<SatelliteScore> & sat, const ClassCounts & counts,
  const ScoringConfig & config)
{
  if (config.threshold <= 0) {
    throw DomainError("threshold must be positive");
  }
  if (!(config.sat_threshold >= 0.0 && config.sat_threshold <= 1.0)) {
    throw DomainError("satellite threshold must be in [0, 1]");
  }
  if (config.mode != Mode::StreetOnly && !sat) {
    throw DomainError(
            std::string("scoring mode '") + std::string(to_string(config.mode)) +
            "' needs a satellite score");
  }

  SpotScore score;
  score.counts = counts;
  score.sat = sat;
  score.mode = config.mode;
  const double street = street_probability(counts.total(), config.threshold);

  switch (config.mode) {
    case Mode::StreetOnly:
      score.probability = street;
      score.positive = decide(counts, config.threshold);
      break;
    case Mode::Prefilter:
      if (sat->max_prob < config.sat_threshold) {
        score.probability = 0.0;
        score.positive = false;
      } else {
        score.probability = street;
        score.positive = decide(counts, config.threshold);
      }
      break;
    case Mode::Weighted:
      if (!(config.sat_weight >= 0.0 && config.sat_weight <= 1.0)) {
        throw DomainError("satellite weight must be in [0, 1]");
      }
      score.probability = config.sat_weight * sat->max_prob + (1.0 - config.sat_weight) * street;
      score.positive = decide(counts, config.threshold);
      break;
  }
  return score;
}

}  // namespace spotfinder::scoring
