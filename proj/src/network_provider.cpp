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
#include <cstdlib>
#include <string>

#include "httplib.h"

#include <nlohmann/json.hpp>

#include "spotfinder/errors.hpp"
#include "spotfinder/imagery.hpp"

namespace spotfinder::imagery
{

NetworkProvider::NetworkProvider(std::string base_url, std::string api_key_env)
: base_url_(std::move(base_url)), api_key_env_(std::move(api_key_env))
{
}

std::string NetworkProvider::get(const std::string & canonical, int & status, std::string & content_type) const
{
  const char * key = std::getenv(api_key_env_.c_str());
  if (key == nullptr || *key == '\0') {
    throw FatalError(api_key_env_ + " is not set; cannot reach the imagery API");
  }
  const std::string host = kCanonicalHost;
  if (canonical.rfind(host, 0) != 0) {
    throw DomainError("not a canonical imagery request: " + canonical);
  }
  const std::string path = canonical.substr(host.size()) + "&key=" + httplib::detail::encode_query_param(key);

  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  client.set_follow_location(true);
  auto res = client.Get(path);
  if (!res) {
    throw RetryableError("imagery request failed: " + httplib::to_string(res.error()));
  }
  status = res->status;
  content_type = res->get_header_value("Content-Type");
  return res->body;
}

std::optional<ImageryProvider::Image> NetworkProvider::fetch(const ImageryRequest & request)
{
  int status = 0;
  std::string content_type;
  const std::string body = get(request.canonical(), status, content_type);
  if (status == 401 || status == 403 || status == 429) {
    throw FatalError("imagery API refused the request (HTTP " + std::to_string(status) + "): quota or credential problem");
  }
  if (status == 404 && request.kind == Kind::Street) {
    return std::nullopt;
  }
  if (status >= 500 || status == 408) {
    throw RetryableError("imagery API unavailable (HTTP " + std::to_string(status) + ")");
  }
  if (status != 200) {
    throw FatalError("imagery API rejected " + request.canonical() + " (HTTP " + std::to_string(status) + ")");
  }
  try {
    const auto * bytes = reinterpret_cast<const std::uint8_t *>(body.data());
    return Image{codec::decode_image({bytes, body.size()}), utc_now()};
  } catch (const DomainError & e) {
    throw RetryableError(std::string("undecodable imagery response: ") + e.what());
  }
}

std::string NetworkProvider::street_status(const geo::GeoPoint & point)
{
  int http_status = 0;
  std::string content_type;
  const std::string body = get(street_metadata_canonical(point), http_status, content_type);
  if (http_status == 401 || http_status == 403 || http_status == 429) {
    throw FatalError("street-view metadata refused (HTTP " + std::to_string(http_status) + ")");
  }
  if (http_status != 200) {
    throw RetryableError("street-view metadata unavailable (HTTP " + std::to_string(http_status) + ")");
  }
  std::string status;
  try {
    status = nlohmann::json::parse(body).at("status").get<std::string>();
  } catch (const nlohmann::json::exception & e) {
    throw RetryableError(std::string("malformed street-view metadata: ") + e.what());
  }
  if (status == "OVER_QUERY_LIMIT" || status == "REQUEST_DENIED") {
    throw FatalError("street-view metadata status " + status);
  }
  if (status == "UNKNOWN_ERROR") {
    throw RetryableError("street-view metadata status UNKNOWN_ERROR");
  }
  return status;
}

}  // namespace spotfinder::imagery
