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

/**
 * @file survey.hpp
 * @brief Survey configuration, cost planning and the full sweep
 *        (grid -> imagery -> preprocess -> detect -> score -> store).
 */

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotfinder/detectors.hpp"
#include "spotfinder/geo.hpp"
#include "spotfinder/imagery.hpp"
#include "spotfinder/scoring.hpp"
#include "spotfinder/spot_store.hpp"

namespace spotfinder::survey
{

inline constexpr int kConfigVersion = 1;

struct BackendConfig
{
  std::string kind = "heuristic";  ///< "heuristic", "fixture" or "external"
  std::string annotations;         ///< fixture: VIA project
  std::string quadrant_probs;      ///< fixture: optional ref -> probability table
  std::string command;             ///< external: program to run
  std::string work_dir;            ///< external: scratch directory
};

struct ProviderConfig
{
  std::string kind = "network";  ///< "network" or "fixture"
  std::string dir;               ///< fixture directory
  std::string base_url = imagery::kCanonicalHost;
};

struct SurveyConfig
{
  std::string survey_id;
  geo::GeoPoint center;
  double half_extent_m = 0.0;
  int zoom = imagery::kDefaultZoom;
  std::optional<double> spacing_m;  ///< defaults to the 640-px tile footprint
  std::vector<int> headings{0, 90, 180, 270};
  scoring::ScoringConfig scoring;
  double min_confidence = detectors::kDefaultMinConfidence;
  imagery::PricingModel pricing;
  BackendConfig backend;
  ProviderConfig provider;
  std::string cache_root = "cache";
  std::string store_path = "store";
  int max_in_flight = 4;
  int min_spacing_ms = 100;
  int max_retries = 2;
  int workers = 4;

  double resolved_spacing() const;
  geo::GridSpec grid() const;
};

/// Parses a config document. Unknown keys are rejected; relative paths are
/// resolved against `base_dir`.
SurveyConfig parse_config(const nlohmann::json & doc, const std::string & base_dir = ".");
SurveyConfig load_config(const std::string & path);
nlohmann::json to_json(const SurveyConfig & config);

struct Plan
{
  double spacing_m = 0.0;
  int per_axis = 0;
  long n_coordinates = 0;
  long n_requests = 0;
  double cost = 0.0;
};

/// Lattice size and imagery bill, without touching the network.
Plan dry_run(const SurveyConfig & config);
/// Same arithmetic for an explicit coordinate count.
Plan plan_for_count(const SurveyConfig & config, long n_coordinates);

struct RunOptions
{
  /// Survey these points instead of the configured lattice.
  std::optional<std::vector<geo::GeoPoint>> points;
  /// Only grid indices below this bound are processed (used to stage a sweep).
  std::optional<long> index_limit;
};

struct RunResult
{
  store::SurveyStats stats;
  imagery::CostLedger ledger;  ///< accumulated over every run of this survey
  imagery::ClientStats client;  ///< this run only
  long n_points = 0;
  long processed = 0;
  long resumed = 0;  ///< already complete and skipped
  long failed = 0;
};

std::unique_ptr<detectors::DetectorBackend> make_backend(const BackendConfig & config);
std::unique_ptr<imagery::ImageryProvider> make_provider(const ProviderConfig & config);

/**
 * @brief Processes every lattice point not already completed in `store`.
 *
 * Coordinates are fanned out to `config.workers` threads and committed in grid
 * order. Per-coordinate errors become `failed` records (retried on the next
 * run); FatalError stops the sweep after committing what finished in order,
 * then propagates.
 */
RunResult run_survey(
  const SurveyConfig & config, store::SpotStore & store,
  imagery::ImageryProvider & provider, const detectors::DetectorBackend & backend,
  std::shared_ptr<imagery::RateLimiter> limiter, const RunOptions & options = {});

/// Builds store, provider, backend and limiter from the config.
RunResult run_survey(const SurveyConfig & config, const RunOptions & options = {});

}  // namespace spotfinder::survey
