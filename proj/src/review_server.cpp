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
#include <thread>

#include "httplib.h"

#include "spotfinder/errors.hpp"
#include "spotfinder/review_service.hpp"

namespace spotfinder::review
{

struct ReviewServer::Impl
{
  const ReviewService & service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(const ReviewService & s)
  : service(s) {}

  void forward(const httplib::Request & req, httplib::Response & res)
  {
    HttpRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    for (const auto & [k, v] : req.params) {
      r.query[k] = v;
    }
    const auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  }
};

ReviewServer::ReviewServer(const ReviewService & service, std::string static_dir)
: impl_(std::make_unique<Impl>(service))
{
  auto handler = [this](const httplib::Request & req, httplib::Response & res) {
      impl_->forward(req, res);
    };
  impl_->server.Get(R"(/api/.*)", handler);
  impl_->server.Post(R"(/api/.*)", handler);
  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  if (!static_dir.empty() && !impl_->server.set_mount_point("/", static_dir)) {
    throw ConfigError("cannot serve static files from " + static_dir);
  }
}

ReviewServer::~ReviewServer()
{
  stop();
}

int ReviewServer::bind(const std::string & host, int port)
{
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) :
    (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw FatalError("cannot bind review server to " + host + ":" + std::to_string(port));
  }
  return bound;
}

void ReviewServer::run()
{
  impl_->server.listen_after_bind();
}

int ReviewServer::start(const std::string & host, int port)
{
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] {run();});
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewServer::stop()
{
  impl_->server.stop();
  if (impl_->thread.joinable()) {
    impl_->thread.join();
  }
}

}  // namespace spotfinder::review
