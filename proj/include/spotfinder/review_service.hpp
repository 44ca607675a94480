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
 * @file review_service.hpp
 * @brief HTTP/JSON API over the spot store for the review UI.
 *
 * Routing lives in ReviewService::handle, which is transport-free; ReviewServer
 * binds it to a socket. Every endpoint is a read-only projection of the store
 * except POST /api/candidates/{id}/verdict. See docs/review-api.yaml.
 */

#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "spotfinder/imagery.hpp"
#include "spotfinder/spot_store.hpp"

namespace spotfinder::review
{

inline constexpr int kDefaultPageSize = 50;
inline constexpr int kMaxPageSize = 200;

struct HttpRequest
{
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse
{
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json json() const {return nlohmann::json::parse(body);}
};

/// Store record projected for the UI: status, counts, image links, detections.
nlohmann::json candidate_view(const store::SpotCandidate & c);

class ReviewService
{
public:
  ReviewService(store::SpotStore & store, const imagery::ImageCache & cache);

  HttpResponse handle(const HttpRequest & request) const;

private:
  HttpResponse list_candidates(const HttpRequest & request) const;
  HttpResponse get_candidate(const std::string & id) const;
  HttpResponse get_image(const std::string & id, const std::string & slot) const;
  HttpResponse post_verdict(const std::string & id, const std::string & body) const;
  HttpResponse get_stats(const HttpRequest & request) const;
  HttpResponse list_surveys() const;

  store::SpotStore & store_;
  const imagery::ImageCache & cache_;
};

class ReviewServer
{
public:
  explicit ReviewServer(const ReviewService & service, std::string static_dir = {});
  ~ReviewServer();

  /// Binds to `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string & host, int port);
  /// Serves until stop() is called.
  void run();
  /// bind() then serve on a background thread.
  int start(const std::string & host, int port);
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spotfinder::review
