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
 * @file spot_store.hpp
 * @brief Persistent record of surveyed coordinates and their review state.
 *
 * State lives in an append-only JSON Lines event log (`events.jsonl`). A
 * derived `snapshot.json` may be written to shorten replay; it records the
 * sequence number of the last event it contains. Opening a store loads the
 * snapshot (if any) and replays the remaining events, so the log alone is
 * always sufficient to rebuild the exact state.
 *
 * One writer at a time; readers take a shared lock and see a consistent state.
 */

#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotfinder/detection.hpp"
#include "spotfinder/geo.hpp"
#include "spotfinder/imagery.hpp"
#include "spotfinder/scoring.hpp"

namespace spotfinder::store
{

enum class Status { Candidate, VerifiedTrue, VerifiedFalse };

/// What happened when the coordinate was surveyed.
enum class Outcome
{
  Scored,      ///< street imagery available and scored
  NoCoverage,  ///< no street-view panorama; recorded with empty counts
  Failed,      ///< backend or imagery error; retried on resume
};

std::string_view to_string(Status s);
std::optional<Status> parse_status(std::string_view s);
std::string_view to_string(Outcome o);

/// One acquired (or missing) image and what the detector found in it.
struct ImageSlot
{
  std::string canonical;
  std::string key;
  std::string status = "ok";  ///< "ok", "no_coverage", "error" or "not_requested"
  int width = 0;
  int height = 0;
  std::optional<int> heading;
  std::vector<Detection> detections;

  friend bool operator==(const ImageSlot &, const ImageSlot &) = default;
};

struct SpotCandidate
{
  std::string id;
  std::string survey_id;
  long grid_index = 0;
  geo::GeoPoint point;
  Outcome outcome = Outcome::Scored;
  std::string error;
  scoring::SpotScore score;
  ImageSlot satellite;
  std::vector<ImageSlot> street;  ///< one per heading, in heading order
  Status status = Status::Candidate;
  std::optional<std::string> verdict_note;
  std::string observed_at;  ///< latest fetched_at among the imagery used
  std::optional<std::string> verdict_at;

  friend bool operator==(const SpotCandidate &, const SpotCandidate &) = default;
};

struct SurveyRecord
{
  std::string id;
  geo::GeoPoint center;
  double half_extent_m = 0.0;
  double spacing_m = 0.0;
  int zoom = 0;
  long n_planned = 0;
  imagery::CostLedger ledger;

  friend bool operator==(const SurveyRecord & a, const SurveyRecord & b)
  {
    return a.id == b.id && a.center == b.center && a.half_extent_m == b.half_extent_m &&
           a.spacing_m == b.spacing_m && a.zoom == b.zoom && a.n_planned == b.n_planned &&
           a.ledger.sat_requests == b.ledger.sat_requests &&
           a.ledger.street_requests == b.ledger.street_requests &&
           a.ledger.sat_price == b.ledger.sat_price && a.ledger.street_price == b.ledger.street_price;
  }
};

struct SurveyStats
{
  long n_coordinates = 0;
  long n_positive = 0;
  long n_verified_true = 0;
  long n_verified_false = 0;
  std::optional<double> precision;  ///< undefined until at least one verdict
};

/// Stable record id for a lattice point of a survey.
std::string candidate_id(const std::string & survey_id, long grid_index);

struct BBox
{
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  bool contains(const geo::GeoPoint & p) const
  {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
  }
};

struct Filter
{
  std::optional<std::string> survey_id;
  std::optional<Status> status;
  std::optional<int> min_total;
  std::optional<BBox> bbox;
  bool positive_only = false;

  bool matches(const SpotCandidate & c) const;
};

nlohmann::json to_json(const SpotCandidate & c);
SpotCandidate candidate_from_json(const nlohmann::json & j);
nlohmann::json to_json(const SurveyRecord & s);
SurveyRecord survey_from_json(const nlohmann::json & j);
nlohmann::json to_json(const scoring::SpotScore & s);
nlohmann::json to_json(const Detection & d);

class SpotStore
{
public:
  using Clock = std::function<std::string()>;

  /// Opens (creating if needed) the store in directory `dir`.
  explicit SpotStore(std::string dir, Clock clock = imagery::utc_now);
  ~SpotStore();
  SpotStore(const SpotStore &) = delete;
  SpotStore & operator=(const SpotStore &) = delete;

  const std::string & dir() const {return dir_;}
  std::string log_path() const;
  std::string snapshot_path() const;

  /// Insert or replace by id. Throws ImmutableRecordError once a verdict exists.
  SpotCandidate upsert_candidate(const SpotCandidate & c);
  /// candidate -> verified_true / verified_false.
  SpotCandidate set_verdict(const std::string & id, bool verdict, std::optional<std::string> note = {});
  /// The note is the one field that stays editable after a verdict.
  SpotCandidate set_note(const std::string & id, std::string note);
  void upsert_survey(const SurveyRecord & s);

  std::optional<SpotCandidate> get(const std::string & id) const;
  /// Matching records ordered by id.
  std::vector<SpotCandidate> list(const Filter & filter = {}) const;
  std::optional<SurveyRecord> survey(const std::string & id) const;
  std::vector<SurveyRecord> surveys() const;

  SurveyStats stats(const std::string & survey_id) const;
  /// Statistics over every record in the store.
  SurveyStats stats_all() const;

  nlohmann::json export_geojson(const Filter & filter = {}) const;

  /// Writes snapshot.json covering every event applied so far.
  void write_snapshot() const;
  long last_sequence() const;

private:
  void replay();
  void append(nlohmann::json event);
  void apply(const nlohmann::json & event);
  SurveyStats stats_locked(const Filter & filter) const;

  std::string dir_;
  Clock clock_;
  std::FILE * log_ = nullptr;
  long seq_ = 0;
  std::map<std::string, SpotCandidate> candidates_;
  std::map<std::string, SurveyRecord> surveys_;
  mutable std::shared_mutex mutex_;
};

/// Greedy thinning: highest probability first (ties by id); a candidate closer
/// than `min_separation_m` to an already kept one is dropped.
std::vector<SpotCandidate> dedup(std::vector<SpotCandidate> candidates, double min_separation_m);

/// Ids carried in the properties of a FeatureCollection produced by export_geojson.
std::set<std::string> read_geojson_ids(const nlohmann::json & feature_collection);

}  // namespace spotfinder::store
