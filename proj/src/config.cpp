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
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "spotfinder/errors.hpp"
#include "spotfinder/hashing.hpp"
#include "spotfinder/survey.hpp"

namespace spotfinder::survey
{

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

// Reads typed members from one JSON object and rejects any key it was not asked about.
class ObjectReader
{
public:
  ObjectReader(const json & obj, std::string where)
  : obj_(obj), where_(std::move(where))
  {
    if (!obj_.is_object()) {
      throw ConfigError(where_ + " must be an object");
    }
  }

  template<typename T>
  std::optional<T> optional(const char * key)
  {
    known_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) {
      return std::nullopt;
    }
    try {
      return it->get<T>();
    } catch (const json::exception &) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }

  template<typename T>
  T required(const char * key)
  {
    auto v = optional<T>(key);
    if (!v) {
      throw ConfigError(where_ + "." + key + " is required");
    }
    return *v;
  }

  const json * child(const char * key)
  {
    known_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const
  {
    for (const auto & [key, value] : obj_.items()) {
      if (!known_.contains(key)) {
        throw ConfigError("unknown key '" + key + "' in " + where_);
      }
    }
  }

private:
  const json & obj_;
  std::string where_;
  std::set<std::string> known_;
};

std::string resolve(const std::string & path, const std::string & base_dir)
{
  if (path.empty() || fs::path(path).is_absolute()) {
    return path;
  }
  return (fs::path(base_dir) / path).lexically_normal().string();
}

void validate(const SurveyConfig & c)
{
  try {
    geo::validate(c.center);
  } catch (const DomainError & e) {
    throw ConfigError(std::string("center: ") + e.what());
  }
  if (!(c.half_extent_m >= 0.0)) {
    throw ConfigError("half_extent_m must be non-negative");
  }
  if (c.zoom < 0 || c.zoom > geo::kMaxZoom) {
    throw ConfigError("zoom must be in [0, 23]");
  }
  if (c.spacing_m && !(*c.spacing_m > 0.0)) {
    throw ConfigError("spacing_m must be positive");
  }
  auto sorted = c.headings;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::vector<int>{0, 90, 180, 270}) {
    throw ConfigError("headings must be the four directions 0, 90, 180, 270");
  }
  if (c.scoring.threshold <= 0) {
    throw ConfigError("threshold must be positive");
  }
  if (!(c.scoring.sat_threshold >= 0.0 && c.scoring.sat_threshold <= 1.0)) {
    throw ConfigError("sat_threshold must be in [0, 1]");
  }
  if (!(c.scoring.sat_weight >= 0.0 && c.scoring.sat_weight <= 1.0)) {
    throw ConfigError("sat_weight must be in [0, 1]");
  }
  if (!(c.min_confidence >= 0.0 && c.min_confidence <= 1.0)) {
    throw ConfigError("min_confidence must be in [0, 1]");
  }
  if (c.pricing.sat_price < 0.0 || c.pricing.street_price < 0.0) {
    throw ConfigError("prices must be non-negative");
  }
  if (c.backend.kind == "fixture" && c.backend.annotations.empty()) {
    throw ConfigError("fixture backend needs backend.annotations");
  }
  if (c.backend.kind == "external" && c.backend.command.empty()) {
    throw ConfigError("external backend needs backend.command");
  }
  if (c.backend.kind != "heuristic" && c.backend.kind != "fixture" && c.backend.kind != "external") {
    throw ConfigError("backend.kind must be heuristic, fixture or external");
  }
  if (c.provider.kind != "network" && c.provider.kind != "fixture") {
    throw ConfigError("provider.kind must be network or fixture");
  }
  if (c.provider.kind == "fixture" && c.provider.dir.empty()) {
    throw ConfigError("fixture provider needs provider.dir");
  }
  if (c.max_in_flight <= 0 || c.min_spacing_ms < 0 || c.workers <= 0 || c.max_retries < 0) {
    throw ConfigError("rate_limit and workers must be positive");
  }
}

}  // namespace

double SurveyConfig::resolved_spacing() const
{
  if (spacing_m) {
    return *spacing_m;
  }
  return geo::tile_footprint(center.lat, zoom, imagery::kDefaultSize).width_m;
}

geo::GridSpec SurveyConfig::grid() const
{
  return {center, half_extent_m, resolved_spacing()};
}

SurveyConfig parse_config(const json & doc, const std::string & base_dir)
{
  ObjectReader root(doc, "config");
  const int version = root.required<int>("version");
  if (version != kConfigVersion) {
    throw ConfigError("unsupported config version " + std::to_string(version));
  }

  SurveyConfig c;
  c.survey_id = root.optional<std::string>("survey_id").value_or("");
  {
    const json * center = root.child("center");
    if (center == nullptr) {
      throw ConfigError("config.center is required");
    }
    ObjectReader r(*center, "center");
    c.center = {r.required<double>("lat"), r.required<double>("lon")};
    r.finish();
  }
  c.half_extent_m = root.required<double>("half_extent_m");
  c.zoom = root.optional<int>("zoom").value_or(c.zoom);
  c.spacing_m = root.optional<double>("spacing_m");
  c.headings = root.optional<std::vector<int>>("headings").value_or(c.headings);
  c.scoring.threshold = root.optional<int>("threshold").value_or(c.scoring.threshold);
  c.scoring.sat_threshold = root.optional<double>("sat_threshold").value_or(c.scoring.sat_threshold);
  c.scoring.sat_weight = root.optional<double>("sat_weight").value_or(c.scoring.sat_weight);
  if (auto mode = root.optional<std::string>("mode")) {
    const auto m = scoring::parse_mode(*mode);
    if (!m) {
      throw ConfigError("mode must be street_only, prefilter or weighted");
    }
    c.scoring.mode = *m;
  }
  c.min_confidence = root.optional<double>("min_confidence").value_or(c.min_confidence);
  if (const json * pricing = root.child("pricing")) {
    ObjectReader r(*pricing, "pricing");
    c.pricing.sat_price = r.optional<double>("sat_price").value_or(c.pricing.sat_price);
    c.pricing.street_price = r.optional<double>("street_price").value_or(c.pricing.street_price);
    r.finish();
  }
  if (const json * backend = root.child("backend")) {
    ObjectReader r(*backend, "backend");
    c.backend.kind = r.required<std::string>("kind");
    c.backend.annotations = resolve(r.optional<std::string>("annotations").value_or(""), base_dir);
    c.backend.quadrant_probs = resolve(r.optional<std::string>("quadrant_probs").value_or(""), base_dir);
    c.backend.command = r.optional<std::string>("command").value_or("");
    c.backend.work_dir = resolve(r.optional<std::string>("work_dir").value_or(""), base_dir);
    r.finish();
  }
  if (const json * provider = root.child("provider")) {
    ObjectReader r(*provider, "provider");
    c.provider.kind = r.required<std::string>("kind");
    c.provider.dir = resolve(r.optional<std::string>("dir").value_or(""), base_dir);
    c.provider.base_url = r.optional<std::string>("base_url").value_or(c.provider.base_url);
    r.finish();
  }
  c.cache_root = resolve(root.optional<std::string>("cache_root").value_or(c.cache_root), base_dir);
  c.store_path = resolve(root.optional<std::string>("store_path").value_or(c.store_path), base_dir);
  if (const json * rl = root.child("rate_limit")) {
    ObjectReader r(*rl, "rate_limit");
    c.max_in_flight = r.optional<int>("max_in_flight").value_or(c.max_in_flight);
    c.min_spacing_ms = r.optional<int>("min_spacing_ms").value_or(c.min_spacing_ms);
    c.max_retries = r.optional<int>("max_retries").value_or(c.max_retries);
    r.finish();
  }
  c.workers = root.optional<int>("workers").value_or(c.workers);
  root.finish();

  validate(c);
  if (c.survey_id.empty()) {
    // Derived from the lattice definition so re-runs of one config resume.
    c.survey_id = "survey-" + sha256_hex(
      imagery::format_coordinate(c.center.lat) + "," + imagery::format_coordinate(c.center.lon) +
      "/" + std::to_string(c.half_extent_m) + "/" + std::to_string(c.resolved_spacing()) +
      "/" + std::to_string(c.zoom)).substr(0, 12);
  }
  return c;
}

SurveyConfig load_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    throw ConfigError("config " + path + " is not valid JSON (byte " + std::to_string(e.byte) + ")");
  }
  const auto base = fs::path(path).parent_path();
  return parse_config(doc, base.empty() ? "." : base.string());
}

json to_json(const SurveyConfig & c)
{
  json backend = {{"kind", c.backend.kind}};
  if (!c.backend.annotations.empty()) {backend["annotations"] = c.backend.annotations;}
  if (!c.backend.quadrant_probs.empty()) {backend["quadrant_probs"] = c.backend.quadrant_probs;}
  if (!c.backend.command.empty()) {backend["command"] = c.backend.command;}
  if (!c.backend.work_dir.empty()) {backend["work_dir"] = c.backend.work_dir;}
  json provider = {{"kind", c.provider.kind}, {"base_url", c.provider.base_url}};
  if (!c.provider.dir.empty()) {provider["dir"] = c.provider.dir;}
  return {
    {"version", kConfigVersion},
    {"survey_id", c.survey_id},
    {"center", {{"lat", c.center.lat}, {"lon", c.center.lon}}},
    {"half_extent_m", c.half_extent_m},
    {"zoom", c.zoom},
    {"spacing_m", c.spacing_m ? json(*c.spacing_m) : json(nullptr)},
    {"headings", c.headings},
    {"threshold", c.scoring.threshold},
    {"sat_threshold", c.scoring.sat_threshold},
    {"sat_weight", c.scoring.sat_weight},
    {"mode", scoring::to_string(c.scoring.mode)},
    {"min_confidence", c.min_confidence},
    {"pricing", {{"sat_price", c.pricing.sat_price}, {"street_price", c.pricing.street_price}}},
    {"backend", std::move(backend)},
    {"provider", std::move(provider)},
    {"cache_root", c.cache_root},
    {"store_path", c.store_path},
    {"rate_limit", {
        {"max_in_flight", c.max_in_flight},
        {"min_spacing_ms", c.min_spacing_ms},
        {"max_retries", c.max_retries}}},
    {"workers", c.workers}};
}

}  // namespace spotfinder::survey
