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
#include "spotfinder/review_service.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "spotfinder/errors.hpp"

namespace spotfinder::review
{

using json = nlohmann::json;

namespace
{

HttpResponse json_response(int status, const json & body)
{
  return {status, "application/json", body.dump()};
}

HttpResponse error_response(int status, const std::string & message, const std::string & reason = {})
{
  json body = {{"error", message}};
  if (!reason.empty()) {
    body["reason"] = reason;
  }
  return json_response(status, body);
}

std::vector<std::string> split(const std::string & s, char sep)
{
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    parts.push_back(cur);
  }
  if (!s.empty() && s.back() == sep) {
    parts.emplace_back();
  }
  return parts;
}

std::optional<double> parse_double(const std::string & s)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) {
      return std::nullopt;
    }
    return v;
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

std::optional<int> parse_int(const std::string & s)
{
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) {
      return std::nullopt;
    }
    return v;
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

/// "minLon,minLat,maxLon,maxLat"
std::optional<store::BBox> parse_bbox(const std::string & s)
{
  const auto parts = split(s, ',');
  if (parts.size() != 4) {
    return std::nullopt;
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    const auto d = parse_double(parts[i]);
    if (!d) {
      return std::nullopt;
    }
    v[i] = *d;
  }
  store::BBox box{v[0], v[1], v[2], v[3]};
  if (box.min_lon > box.max_lon || box.min_lat > box.max_lat ||
    box.min_lat < -90 || box.max_lat > 90 || box.min_lon < -180 || box.max_lon > 180)
  {
    return std::nullopt;
  }
  return box;
}

json image_ref(const std::string & id, const std::string & slot_name, const store::ImageSlot & slot)
{
  json ref = {
    {"slot", slot_name},
    {"status", slot.status},
    {"width", slot.width},
    {"height", slot.height},
    {"url", slot.status == "ok" ? json("/api/candidates/" + id + "/image/" + slot_name) : json(nullptr)}};
  if (slot.heading) {
    ref["heading"] = *slot.heading;
  }
  return ref;
}

json stats_json(const store::SurveyStats & st)
{
  return {
    {"n_coordinates", st.n_coordinates},
    {"n_positive", st.n_positive},
    {"n_verified_true", st.n_verified_true},
    {"n_verified_false", st.n_verified_false},
    {"precision", st.precision ? json(*st.precision) : json(nullptr)}};
}

const store::ImageSlot * find_slot(const store::SpotCandidate & c, const std::string & slot)
{
  if (slot == "sat") {
    return &c.satellite;
  }
  if (slot.size() == 7 && slot.rfind("street", 0) == 0 && slot[6] >= '0' && slot[6] <= '3') {
    const std::size_t i = static_cast<std::size_t>(slot[6] - '0');
    return i < c.street.size() ? &c.street[i] : nullptr;
  }
  return nullptr;
}

}  // namespace

json candidate_view(const store::SpotCandidate & c)
{
  json street = json::array();
  for (std::size_t i = 0; i < c.street.size(); ++i) {
    json ref = image_ref(c.id, "street" + std::to_string(i), c.street[i]);
    json dets = json::array();
    for (const auto & d : c.street[i].detections) {
      dets.push_back(store::to_json(d));
    }
    ref["detections"] = std::move(dets);
    street.push_back(std::move(ref));
  }
  const auto score = store::to_json(c.score);
  return {
    {"id", c.id},
    {"survey_id", c.survey_id},
    {"grid_index", c.grid_index},
    {"point", {{"lat", c.point.lat}, {"lon", c.point.lon}}},
    {"status", store::to_string(c.status)},
    {"outcome", store::to_string(c.outcome)},
    {"counts", score.at("counts")},
    {"probability", c.score.probability},
    {"positive", c.score.positive},
    {"sat", score.at("sat")},
    {"verdict_note", c.verdict_note ? json(*c.verdict_note) : json(nullptr)},
    {"images", {{"sat", image_ref(c.id, "sat", c.satellite)}, {"street", std::move(street)}}}};
}

ReviewService::ReviewService(store::SpotStore & store, const imagery::ImageCache & cache)
: store_(store), cache_(cache)
{
}

HttpResponse ReviewService::handle(const HttpRequest & request) const
{
  auto parts = split(request.path, '/');
  // "/api/x" -> {"", "api", "x"}
  if (parts.size() < 3 || !parts[0].empty() || parts[1] != "api") {
    return error_response(404, "no such endpoint");
  }
  parts.erase(parts.begin(), parts.begin() + 2);
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";

  try {
    if (parts.size() == 1 && parts[0] == "candidates") {
      return get ? list_candidates(request) : error_response(405, "method not allowed");
    }
    if (parts.size() == 2 && parts[0] == "candidates") {
      return get ? get_candidate(parts[1]) : error_response(405, "method not allowed");
    }
    if (parts.size() == 4 && parts[0] == "candidates" && parts[2] == "image") {
      return get ? get_image(parts[1], parts[3]) : error_response(405, "method not allowed");
    }
    if (parts.size() == 3 && parts[0] == "candidates" && parts[2] == "verdict") {
      return post ? post_verdict(parts[1], request.body) : error_response(405, "method not allowed");
    }
    if (parts.size() == 1 && parts[0] == "stats") {
      return get ? get_stats(request) : error_response(405, "method not allowed");
    }
    if (parts.size() == 1 && parts[0] == "surveys") {
      return get ? list_surveys() : error_response(405, "method not allowed");
    }
  } catch (const NotFoundError & e) {
    return error_response(404, e.what());
  } catch (const ImmutableRecordError & e) {
    return error_response(409, e.what());
  } catch (const std::exception & e) {
    return error_response(500, e.what());
  }
  return error_response(404, "no such endpoint");
}

HttpResponse ReviewService::list_candidates(const HttpRequest & request) const
{
  store::Filter filter;
  filter.positive_only = true;
  int page = 1;
  int page_size = kDefaultPageSize;
  for (const auto & [key, value] : request.query) {
    if (key == "bbox") {
      filter.bbox = parse_bbox(value);
      if (!filter.bbox) {
        return error_response(400, "bbox must be minLon,minLat,maxLon,maxLat");
      }
    } else if (key == "status") {
      filter.status = store::parse_status(value);
      if (!filter.status) {
        return error_response(400, "status must be candidate, verified_true or verified_false");
      }
    } else if (key == "min_total") {
      const auto v = parse_int(value);
      if (!v || *v < 0) {
        return error_response(400, "min_total must be a non-negative integer");
      }
      filter.min_total = *v;
    } else if (key == "survey") {
      filter.survey_id = value;
    } else if (key == "all") {
      filter.positive_only = !(value == "1" || value == "true");
    } else if (key == "page") {
      const auto v = parse_int(value);
      if (!v || *v < 1) {
        return error_response(400, "page must be a positive integer");
      }
      page = *v;
    } else if (key == "page_size") {
      const auto v = parse_int(value);
      if (!v || *v < 1 || *v > kMaxPageSize) {
        return error_response(400, "page_size must be in [1, 200]");
      }
      page_size = *v;
    } else {
      return error_response(400, "unknown query parameter '" + key + "'");
    }
  }

  const auto records = store_.list(filter);
  json items = json::array();
  const std::size_t first = static_cast<std::size_t>(page - 1) * page_size;
  for (std::size_t i = first; i < records.size() && i < first + page_size; ++i) {
    items.push_back(candidate_view(records[i]));
  }
  return json_response(
    200, {
      {"items", std::move(items)},
      {"page", page},
      {"page_size", page_size},
      {"total", records.size()}});
}

HttpResponse ReviewService::get_candidate(const std::string & id) const
{
  const auto c = store_.get(id);
  if (!c) {
    return error_response(404, "no candidate with id " + id);
  }
  return json_response(200, candidate_view(*c));
}

HttpResponse ReviewService::get_image(const std::string & id, const std::string & slot_name) const
{
  const auto c = store_.get(id);
  if (!c) {
    return error_response(404, "no candidate with id " + id);
  }
  const auto * slot = find_slot(*c, slot_name);
  if (slot == nullptr) {
    return error_response(404, "unknown image slot '" + slot_name + "'");
  }
  if (slot->status != "ok") {
    return error_response(404, "no imagery for slot " + slot_name, slot->status);
  }
  std::ifstream in(cache_.image_path(slot->key), std::ios::binary);
  if (!in) {
    return error_response(410, "image no longer in cache", "evicted");
  }
  return {200, "image/png", std::string{std::istreambuf_iterator<char>(in), {}}};
}

HttpResponse ReviewService::post_verdict(const std::string & id, const std::string & body) const
{
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error &) {
    return error_response(400, "verdict body must be JSON");
  }
  if (!doc.is_object() || !doc.contains("verdict")) {
    return error_response(400, "verdict body needs a 'verdict' field");
  }
  std::optional<bool> verdict;
  const auto & v = doc.at("verdict");
  if (v.is_boolean()) {
    verdict = v.get<bool>();
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "true" || s == "verified_true") {verdict = true;}
    if (s == "false" || s == "verified_false") {verdict = false;}
  }
  if (!verdict) {
    return error_response(400, "verdict must be true or false");
  }
  std::optional<std::string> note;
  if (doc.contains("note") && !doc.at("note").is_null()) {
    if (!doc.at("note").is_string()) {
      return error_response(400, "note must be a string");
    }
    note = doc.at("note").get<std::string>();
  }
  const auto updated = store_.set_verdict(id, *verdict, note);
  return json_response(200, candidate_view(updated));
}

HttpResponse ReviewService::get_stats(const HttpRequest & request) const
{
  const auto it = request.query.find("survey");
  if (it == request.query.end()) {
    return json_response(200, stats_json(store_.stats_all()));
  }
  json body = stats_json(store_.stats(it->second));
  if (const auto s = store_.survey(it->second)) {
    body["survey"] = store::to_json(*s);
  }
  return json_response(200, body);
}

HttpResponse ReviewService::list_surveys() const
{
  json items = json::array();
  for (const auto & s : store_.surveys()) {
    items.push_back(store::to_json(s));
  }
  return json_response(200, {{"items", std::move(items)}});
}

}  // namespace spotfinder::review
