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
#include "spotfinder/spot_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "spotfinder/errors.hpp"
#include "spotfinder/hashing.hpp"

namespace spotfinder::store
{

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Status s)
{
  switch (s) {
    case Status::Candidate: return "candidate";
    case Status::VerifiedTrue: return "verified_true";
    case Status::VerifiedFalse: return "verified_false";
  }
  return "unknown";
}

std::optional<Status> parse_status(std::string_view s)
{
  for (const auto v : {Status::Candidate, Status::VerifiedTrue, Status::VerifiedFalse}) {
    if (to_string(v) == s) {
      return v;
    }
  }
  return std::nullopt;
}

std::string_view to_string(Outcome o)
{
  switch (o) {
    case Outcome::Scored: return "scored";
    case Outcome::NoCoverage: return "no_coverage";
    case Outcome::Failed: return "failed";
  }
  return "unknown";
}

namespace
{

Outcome parse_outcome(const std::string & s)
{
  for (const auto v : {Outcome::Scored, Outcome::NoCoverage, Outcome::Failed}) {
    if (to_string(v) == s) {
      return v;
    }
  }
  throw Error("unknown outcome '" + s + "' in store");
}

json optional_string(const std::optional<std::string> & s)
{
  return s ? json(*s) : json(nullptr);
}

std::optional<std::string> read_optional_string(const json & j, const char * key)
{
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    return std::nullopt;
  }
  return it->get<std::string>();
}

json slot_to_json(const ImageSlot & s)
{
  json dets = json::array();
  for (const auto & d : s.detections) {
    dets.push_back(to_json(d));
  }
  return {
    {"canonical", s.canonical}, {"key", s.key}, {"status", s.status},
    {"width", s.width}, {"height", s.height},
    {"heading", s.heading ? json(*s.heading) : json(nullptr)},
    {"detections", std::move(dets)}};
}

ImageSlot slot_from_json(const json & j)
{
  ImageSlot s;
  s.canonical = j.at("canonical").get<std::string>();
  s.key = j.at("key").get<std::string>();
  s.status = j.at("status").get<std::string>();
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  if (!j.at("heading").is_null()) {
    s.heading = j.at("heading").get<int>();
  }
  for (const auto & d : j.at("detections")) {
    Detection det;
    const auto label = d.at("class").get<std::string>();
    const auto cls = parse_object_class(label);
    if (!cls) {
      throw Error("unknown class '" + label + "' in store");
    }
    det.cls = *cls;
    det.confidence = d.at("confidence").get<double>();
    for (const auto & v : d.at("polygon")) {
      det.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    s.detections.push_back(std::move(det));
  }
  return s;
}

scoring::SpotScore score_from_json(const json & j)
{
  scoring::SpotScore s;
  const auto & counts = j.at("counts");
  s.counts.short_wall = counts.at("short_wall").get<int>();
  s.counts.railing = counts.at("railing").get<int>();
  s.counts.stairs = counts.at("stairs").get<int>();
  if (!j.at("sat").is_null()) {
    SatelliteScore sat;
    sat.quadrant_probs = j.at("sat").at("quadrant_probs").get<std::array<double, 4>>();
    sat.max_prob = j.at("sat").at("max_prob").get<double>();
    s.sat = sat;
  }
  s.probability = j.at("probability").get<double>();
  s.positive = j.at("positive").get<bool>();
  const auto mode = scoring::parse_mode(j.at("mode").get<std::string>());
  if (!mode) {
    throw Error("unknown scoring mode in store");
  }
  s.mode = *mode;
  return s;
}

void validate_candidate(const SpotCandidate & c)
{
  if (c.id.empty() || c.survey_id.empty()) {
    throw DomainError("candidate needs an id and a survey id");
  }
  geo::validate(c.point);
  if (!(c.score.probability >= 0.0 && c.score.probability <= 1.0)) {
    throw DomainError("candidate probability outside [0, 1]");
  }
}

}  // namespace

json to_json(const Detection & d)
{
  json poly = json::array();
  for (const auto & v : d.polygon) {
    poly.push_back({v.x, v.y});
  }
  return {{"class", to_string(d.cls)}, {"confidence", d.confidence}, {"polygon", std::move(poly)}};
}

json to_json(const scoring::SpotScore & s)
{
  json sat = nullptr;
  if (s.sat) {
    sat = {{"quadrant_probs", s.sat->quadrant_probs}, {"max_prob", s.sat->max_prob}};
  }
  return {
    {"counts", {
        {"short_wall", s.counts.short_wall},
        {"railing", s.counts.railing},
        {"stairs", s.counts.stairs},
        {"total", s.counts.total()}}},
    {"sat", std::move(sat)},
    {"probability", s.probability},
    {"positive", s.positive},
    {"mode", scoring::to_string(s.mode)}};
}

json to_json(const SpotCandidate & c)
{
  json street = json::array();
  for (const auto & s : c.street) {
    street.push_back(slot_to_json(s));
  }
  return {
    {"id", c.id},
    {"survey_id", c.survey_id},
    {"grid_index", c.grid_index},
    {"point", {{"lat", c.point.lat}, {"lon", c.point.lon}}},
    {"outcome", to_string(c.outcome)},
    {"error", c.error},
    {"score", to_json(c.score)},
    {"satellite", slot_to_json(c.satellite)},
    {"street", std::move(street)},
    {"status", to_string(c.status)},
    {"verdict_note", optional_string(c.verdict_note)},
    {"observed_at", c.observed_at},
    {"verdict_at", optional_string(c.verdict_at)}};
}

SpotCandidate candidate_from_json(const json & j)
{
  SpotCandidate c;
  c.id = j.at("id").get<std::string>();
  c.survey_id = j.at("survey_id").get<std::string>();
  c.grid_index = j.at("grid_index").get<long>();
  c.point = {j.at("point").at("lat").get<double>(), j.at("point").at("lon").get<double>()};
  c.outcome = parse_outcome(j.at("outcome").get<std::string>());
  c.error = j.value("error", "");
  c.score = score_from_json(j.at("score"));
  c.satellite = slot_from_json(j.at("satellite"));
  for (const auto & s : j.at("street")) {
    c.street.push_back(slot_from_json(s));
  }
  const auto status = parse_status(j.at("status").get<std::string>());
  if (!status) {
    throw Error("unknown status in store");
  }
  c.status = *status;
  c.verdict_note = read_optional_string(j, "verdict_note");
  c.observed_at = j.value("observed_at", "");
  c.verdict_at = read_optional_string(j, "verdict_at");
  return c;
}

json to_json(const SurveyRecord & s)
{
  return {
    {"id", s.id},
    {"center", {{"lat", s.center.lat}, {"lon", s.center.lon}}},
    {"half_extent_m", s.half_extent_m},
    {"spacing_m", s.spacing_m},
    {"zoom", s.zoom},
    {"n_planned", s.n_planned},
    {"ledger", {
        {"sat_requests", s.ledger.sat_requests},
        {"street_requests", s.ledger.street_requests},
        {"sat_price", s.ledger.sat_price},
        {"street_price", s.ledger.street_price},
        {"total", s.ledger.total()}}}};
}

SurveyRecord survey_from_json(const json & j)
{
  SurveyRecord s;
  s.id = j.at("id").get<std::string>();
  s.center = {j.at("center").at("lat").get<double>(), j.at("center").at("lon").get<double>()};
  s.half_extent_m = j.at("half_extent_m").get<double>();
  s.spacing_m = j.at("spacing_m").get<double>();
  s.zoom = j.at("zoom").get<int>();
  s.n_planned = j.at("n_planned").get<long>();
  const auto & l = j.at("ledger");
  s.ledger.sat_requests = l.at("sat_requests").get<long>();
  s.ledger.street_requests = l.at("street_requests").get<long>();
  s.ledger.sat_price = l.at("sat_price").get<double>();
  s.ledger.street_price = l.at("street_price").get<double>();
  return s;
}

std::string candidate_id(const std::string & survey_id, long grid_index)
{
  return sha256_hex(survey_id + "/" + std::to_string(grid_index)).substr(0, 16);
}

bool Filter::matches(const SpotCandidate & c) const
{
  if (survey_id && c.survey_id != *survey_id) {
    return false;
  }
  if (status && c.status != *status) {
    return false;
  }
  if (min_total && c.score.counts.total() < *min_total) {
    return false;
  }
  if (bbox && !bbox->contains(c.point)) {
    return false;
  }
  if (positive_only && !c.score.positive) {
    return false;
  }
  return true;
}

// --- SpotStore --------------------------------------------------------------

SpotStore::SpotStore(std::string dir, Clock clock)
: dir_(std::move(dir)), clock_(std::move(clock))
{
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    throw FatalError("cannot create store directory " + dir_ + ": " + ec.message());
  }
  replay();
  log_ = std::fopen(log_path().c_str(), "ab");
  if (log_ == nullptr) {
    throw FatalError("cannot open event log " + log_path());
  }
}

SpotStore::~SpotStore()
{
  if (log_ != nullptr) {
    std::fclose(log_);
  }
}

std::string SpotStore::log_path() const
{
  return (fs::path(dir_) / "events.jsonl").string();
}

std::string SpotStore::snapshot_path() const
{
  return (fs::path(dir_) / "snapshot.json").string();
}

void SpotStore::replay()
{
  // Snapshot first; the log decides whether it is usable.
  long snapshot_seq = 0;
  std::map<std::string, SpotCandidate> snap_candidates;
  std::map<std::string, SurveyRecord> snap_surveys;
  if (std::ifstream in(snapshot_path()); in) {
    try {
      const auto doc = json::parse(in);
      snapshot_seq = doc.at("seq").get<long>();
      for (const auto & c : doc.at("candidates")) {
        auto rec = candidate_from_json(c);
        snap_candidates.emplace(rec.id, std::move(rec));
      }
      for (const auto & s : doc.at("surveys")) {
        auto rec = survey_from_json(s);
        snap_surveys.emplace(rec.id, std::move(rec));
      }
    } catch (const std::exception &) {
      snapshot_seq = 0;
      snap_candidates.clear();
      snap_surveys.clear();
    }
  }

  std::vector<json> events;
  std::ifstream in(log_path(), std::ios::binary);
  std::string line;
  std::streamoff good_end = 0;
  bool torn_tail = false;
  while (in) {
    const std::streamoff start = in.tellg();
    if (!std::getline(in, line)) {
      break;
    }
    const bool terminated = !in.eof();
    if (line.empty() && terminated) {
      good_end = in.tellg();
      continue;
    }
    if (!terminated) {
      // A crash mid-append leaves a partial last line without its newline.
      torn_tail = true;
      break;
    }
    try {
      events.push_back(json::parse(line));
      good_end = in.tellg();
    } catch (const json::exception &) {
      if (in.peek() != std::char_traits<char>::eof()) {
        throw FatalError(
                "corrupt event in " + log_path() + " at byte " + std::to_string(start));
      }
      torn_tail = true;
      break;
    }
  }
  in.close();
  if (torn_tail) {
    fs::resize_file(log_path(), static_cast<std::uintmax_t>(good_end));
  }

  long log_seq = 0;
  if (!events.empty()) {
    const auto it = events.back().find("seq");
    if (it == events.back().end() || !it->is_number_integer()) {
      throw FatalError("event without a sequence number in " + log_path());
    }
    log_seq = it->get<long>();
  }
  if (snapshot_seq > log_seq) {
    snapshot_seq = 0;
    snap_candidates.clear();
    snap_surveys.clear();
  }
  candidates_ = std::move(snap_candidates);
  surveys_ = std::move(snap_surveys);
  seq_ = snapshot_seq;
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      if (events[i].at("seq").get<long>() > snapshot_seq) {
        apply(events[i]);
      }
    } catch (const FatalError &) {
      throw;
    } catch (const std::exception & e) {
      throw FatalError(
              "malformed event on line " + std::to_string(i + 1) + " of " + log_path() + ": " + e.what());
    }
  }
}

void SpotStore::append(json event)
{
  event["seq"] = seq_ + 1;
  const std::string line = event.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() ||
    std::fflush(log_) != 0 || ::fsync(::fileno(log_)) != 0)
  {
    throw FatalError("cannot append to event log " + log_path());
  }
  apply(event);
}

void SpotStore::apply(const json & event)
{
  const auto type = event.at("type").get<std::string>();
  if (type == "upsert") {
    auto rec = candidate_from_json(event.at("record"));
    const std::string id = rec.id;
    candidates_.insert_or_assign(id, std::move(rec));
  } else if (type == "verdict") {
    auto & rec = candidates_.at(event.at("id").get<std::string>());
    rec.status = event.at("verdict").get<bool>() ? Status::VerifiedTrue : Status::VerifiedFalse;
    if (auto note = read_optional_string(event, "note")) {
      rec.verdict_note = std::move(note);
    }
    rec.verdict_at = event.at("at").get<std::string>();
  } else if (type == "note") {
    candidates_.at(event.at("id").get<std::string>()).verdict_note =
      event.at("note").get<std::string>();
  } else if (type == "survey") {
    auto rec = survey_from_json(event.at("survey"));
    const std::string id = rec.id;
    surveys_.insert_or_assign(id, std::move(rec));
  } else {
    throw FatalError("unknown event type '" + type + "' in " + log_path());
  }
  seq_ = event.at("seq").get<long>();
}

SpotCandidate SpotStore::upsert_candidate(const SpotCandidate & c)
{
  validate_candidate(c);
  std::unique_lock lock(mutex_);
  if (const auto it = candidates_.find(c.id);
    it != candidates_.end() && it->second.status != Status::Candidate)
  {
    throw ImmutableRecordError("record " + c.id + " is already verified and cannot be replaced");
  }
  append({{"type", "upsert"}, {"record", to_json(c)}});
  return candidates_.at(c.id);
}

SpotCandidate SpotStore::set_verdict(const std::string & id, bool verdict, std::optional<std::string> note)
{
  std::unique_lock lock(mutex_);
  const auto it = candidates_.find(id);
  if (it == candidates_.end()) {
    throw NotFoundError("no candidate with id " + id);
  }
  if (it->second.status != Status::Candidate) {
    throw ImmutableRecordError(
            "candidate " + id + " already has verdict " + std::string(to_string(it->second.status)));
  }
  append({{"type", "verdict"}, {"id", id}, {"verdict", verdict}, {"note", optional_string(note)},
      {"at", clock_()}});
  return candidates_.at(id);
}

SpotCandidate SpotStore::set_note(const std::string & id, std::string note)
{
  std::unique_lock lock(mutex_);
  if (!candidates_.contains(id)) {
    throw NotFoundError("no candidate with id " + id);
  }
  append({{"type", "note"}, {"id", id}, {"note", std::move(note)}});
  return candidates_.at(id);
}

void SpotStore::upsert_survey(const SurveyRecord & s)
{
  if (s.id.empty()) {
    throw DomainError("survey needs an id");
  }
  std::unique_lock lock(mutex_);
  append({{"type", "survey"}, {"survey", to_json(s)}});
}

std::optional<SpotCandidate> SpotStore::get(const std::string & id) const
{
  std::shared_lock lock(mutex_);
  const auto it = candidates_.find(id);
  if (it == candidates_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<SpotCandidate> SpotStore::list(const Filter & filter) const
{
  std::shared_lock lock(mutex_);
  std::vector<SpotCandidate> out;
  for (const auto & [id, c] : candidates_) {
    if (filter.matches(c)) {
      out.push_back(c);
    }
  }
  return out;
}

std::optional<SurveyRecord> SpotStore::survey(const std::string & id) const
{
  std::shared_lock lock(mutex_);
  const auto it = surveys_.find(id);
  if (it == surveys_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<SurveyRecord> SpotStore::surveys() const
{
  std::shared_lock lock(mutex_);
  std::vector<SurveyRecord> out;
  for (const auto & [id, s] : surveys_) {
    out.push_back(s);
  }
  return out;
}

SurveyStats SpotStore::stats_locked(const Filter & filter) const
{
  SurveyStats st;
  for (const auto & [id, c] : candidates_) {
    if (!filter.matches(c)) {
      continue;
    }
    ++st.n_coordinates;
    st.n_positive += c.score.positive ? 1 : 0;
    st.n_verified_true += c.status == Status::VerifiedTrue ? 1 : 0;
    st.n_verified_false += c.status == Status::VerifiedFalse ? 1 : 0;
  }
  const long verdicts = st.n_verified_true + st.n_verified_false;
  if (verdicts > 0) {
    st.precision = static_cast<double>(st.n_verified_true) / static_cast<double>(verdicts);
  }
  return st;
}

SurveyStats SpotStore::stats(const std::string & survey_id) const
{
  std::shared_lock lock(mutex_);
  Filter f;
  f.survey_id = survey_id;
  const bool known = surveys_.contains(survey_id) ||
    std::any_of(
    candidates_.begin(), candidates_.end(),
    [&](const auto & kv) {return kv.second.survey_id == survey_id;});
  if (!known) {
    throw NotFoundError("no survey with id " + survey_id);
  }
  return stats_locked(f);
}

SurveyStats SpotStore::stats_all() const
{
  std::shared_lock lock(mutex_);
  return stats_locked({});
}

json SpotStore::export_geojson(const Filter & filter) const
{
  json features = json::array();
  for (const auto & c : list(filter)) {
    features.push_back(
    {
      {"type", "Feature"},
      {"geometry", {{"type", "Point"}, {"coordinates", {c.point.lon, c.point.lat}}}},
      {"properties", {
          {"id", c.id},
          {"survey_id", c.survey_id},
          {"status", to_string(c.status)},
          {"positive", c.score.positive},
          {"total_count", c.score.counts.total()},
          {"short_wall", c.score.counts.short_wall},
          {"railing", c.score.counts.railing},
          {"stairs", c.score.counts.stairs},
          {"probability", c.score.probability}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

void SpotStore::write_snapshot() const
{
  std::shared_lock lock(mutex_);
  json candidates = json::array();
  for (const auto & [id, c] : candidates_) {
    candidates.push_back(to_json(c));
  }
  json surveys = json::array();
  for (const auto & [id, s] : surveys_) {
    surveys.push_back(to_json(s));
  }
  const json doc = {{"seq", seq_}, {"candidates", std::move(candidates)}, {"surveys", std::move(surveys)}};
  const std::string tmp = snapshot_path() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump() << "\n";
    if (!out) {
      throw FatalError("cannot write snapshot " + tmp);
    }
  }
  fs::rename(tmp, snapshot_path());
}

long SpotStore::last_sequence() const
{
  std::shared_lock lock(mutex_);
  return seq_;
}

std::vector<SpotCandidate> dedup(std::vector<SpotCandidate> candidates, double min_separation_m)
{
  if (!(min_separation_m >= 0.0)) {
    throw DomainError("minimum separation must be non-negative");
  }
  std::sort(
    candidates.begin(), candidates.end(), [](const SpotCandidate & a, const SpotCandidate & b) {
      if (a.score.probability != b.score.probability) {
        return a.score.probability > b.score.probability;
      }
      return a.id < b.id;
    });
  std::vector<SpotCandidate> kept;
  for (auto & c : candidates) {
    const bool crowded = std::any_of(
      kept.begin(), kept.end(), [&](const SpotCandidate & k) {
        return geo::haversine(k.point, c.point) < min_separation_m;
      });
    if (!crowded) {
      kept.push_back(std::move(c));
    }
  }
  return kept;
}

std::set<std::string> read_geojson_ids(const json & feature_collection)
{
  if (feature_collection.value("type", "") != "FeatureCollection") {
    throw DomainError("not a GeoJSON FeatureCollection");
  }
  std::set<std::string> ids;
  for (const auto & f : feature_collection.at("features")) {
    ids.insert(f.at("properties").at("id").get<std::string>());
  }
  return ids;
}

}  // namespace spotfinder::store
