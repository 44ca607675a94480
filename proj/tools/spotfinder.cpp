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
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include "spotfinder/annotations.hpp"
#include "spotfinder/errors.hpp"
#include "spotfinder/evaluation.hpp"
#include "spotfinder/review_service.hpp"
#include "spotfinder/survey.hpp"

namespace
{

using json = nlohmann::json;
using namespace spotfinder;

json stats_json(const store::SurveyStats & st)
{
  return {
    {"n_coordinates", st.n_coordinates},
    {"n_positive", st.n_positive},
    {"n_verified_true", st.n_verified_true},
    {"n_verified_false", st.n_verified_false},
    {"precision", st.precision ? json(*st.precision) : json(nullptr)}};
}

json ledger_json(const imagery::CostLedger & l)
{
  return {
    {"sat_requests", l.sat_requests},
    {"street_requests", l.street_requests},
    {"requests", l.requests()},
    {"cost", l.total()}};
}

// --store wins; otherwise the store named by --config.
std::string store_dir(const std::string & store, const std::string & config)
{
  if (!store.empty()) {
    return store;
  }
  if (!config.empty()) {
    return survey::load_config(config).store_path;
  }
  throw ConfigError("either --store or --config is required");
}

review::ReviewServer * g_server = nullptr;

void on_signal(int)
{
  if (g_server != nullptr) {
    g_server->stop();
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"spotfinder: survey a region for parkour spots from satellite and street-view imagery"};
  app.require_subcommand(1);

  // survey -----------------------------------------------------------------
  auto * survey_cmd = app.add_subcommand("survey", "run, plan and inspect surveys");
  survey_cmd->require_subcommand(1);

  std::string config_path;
  int workers = 0;
  auto * run = survey_cmd->add_subcommand("run", "sweep the configured region");
  run->add_option("--config", config_path, "survey config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "override the worker count");

  auto * dry = survey_cmd->add_subcommand("dry-run", "count coordinates and requests, estimate cost");
  dry->add_option("--config", config_path, "survey config (JSON)")->required()->check(CLI::ExistingFile);

  std::string store_path;
  std::string format = "geojson";
  std::string out_path;
  std::string status_filter;
  std::string survey_filter;
  bool positive_only = false;
  auto * exp = survey_cmd->add_subcommand("export", "export stored spots");
  exp->add_option("--format", format, "output format")->check(CLI::IsMember({"geojson"}));
  exp->add_option("--out", out_path, "output file")->required();
  exp->add_option("--store", store_path, "store directory");
  exp->add_option("--config", config_path, "take the store from this config");
  exp->add_option("--status", status_filter, "candidate, verified_true or verified_false");
  exp->add_option("--survey", survey_filter, "restrict to one survey id");
  exp->add_flag("--positive-only", positive_only, "only coordinates above the hit threshold");

  auto * stats = survey_cmd->add_subcommand("stats", "print survey statistics");
  stats->add_option("--store", store_path, "store directory");
  stats->add_option("--config", config_path, "take the store (and survey id) from this config");
  stats->add_option("--survey", survey_filter, "survey id");

  // eval -------------------------------------------------------------------
  auto * eval_cmd = app.add_subcommand("eval", "evaluate detector backends");
  eval_cmd->require_subcommand(1);
  std::string annotations_path;
  std::string backend_name;
  std::string images_dir;
  std::string backend_command;
  double min_confidence = detectors::kDefaultMinConfidence;
  auto * via = eval_cmd->add_subcommand("via", "compare backend detections with VIA annotations");
  via->add_option("--annotations", annotations_path, "VIA project export")->required()->check(CLI::ExistingFile);
  via->add_option("--backend", backend_name, "fixture, heuristic or external")->required()
  ->check(CLI::IsMember({"fixture", "heuristic", "external"}));
  via->add_option("--images", images_dir, "directory holding the annotated images (default: next to the annotations)");
  via->add_option("--command", backend_command, "program for the external backend");
  via->add_option("--min-confidence", min_confidence, "detection confidence floor")->check(CLI::Range(0.0, 1.0));

  // review -----------------------------------------------------------------
  auto * review_cmd = app.add_subcommand("review", "human verification service");
  review_cmd->require_subcommand(1);
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string cache_root;
  std::string static_dir;
  auto * serve = review_cmd->add_subcommand("serve", "serve the review API");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "bind address");
  serve->add_option("--store", store_path, "store directory");
  serve->add_option("--cache", cache_root, "imagery cache root");
  serve->add_option("--config", config_path, "take store and cache from this config");
  serve->add_option("--static", static_dir, "also serve the review UI from this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto config = survey::load_config(config_path);
      if (workers > 0) {
        config.workers = workers;
      }
      const auto r = survey::run_survey(config);
      std::cout << json{
        {"survey_id", config.survey_id},
        {"coordinates", r.n_points},
        {"processed", r.processed},
        {"resumed", r.resumed},
        {"failed", r.failed},
        {"network_fetches", r.client.network_fetches},
        {"cache_hits", r.client.cache_hits},
        {"ledger", ledger_json(r.ledger)},
        {"stats", stats_json(r.stats)}}.dump(2) << "\n";
    } else if (dry->parsed()) {
      const auto config = survey::load_config(config_path);
      const auto plan = survey::dry_run(config);
      std::cout << json{
        {"survey_id", config.survey_id},
        {"spacing_m", plan.spacing_m},
        {"per_axis", plan.per_axis},
        {"n_coordinates", plan.n_coordinates},
        {"n_requests", plan.n_requests},
        {"cost", plan.cost}}.dump(2) << "\n";
    } else if (exp->parsed()) {
      const store::SpotStore s(store_dir(store_path, config_path));
      store::Filter filter;
      filter.positive_only = positive_only;
      if (!survey_filter.empty()) {
        filter.survey_id = survey_filter;
      }
      if (!status_filter.empty()) {
        filter.status = store::parse_status(status_filter);
        if (!filter.status) {
          throw ConfigError("unknown status '" + status_filter + "'");
        }
      }
      const auto doc = s.export_geojson(filter);
      std::ofstream out(out_path);
      out << doc.dump(2) << "\n";
      if (!out) {
        throw FatalError("cannot write " + out_path);
      }
      std::cerr << "wrote " << doc.at("features").size() << " features to " << out_path << "\n";
    } else if (stats->parsed()) {
      std::string survey_id = survey_filter;
      if (survey_id.empty() && !config_path.empty()) {
        survey_id = survey::load_config(config_path).survey_id;
      }
      const store::SpotStore s(store_dir(store_path, config_path));
      json out = stats_json(survey_id.empty() ? s.stats_all() : s.stats(survey_id));
      if (!survey_id.empty()) {
        out["survey_id"] = survey_id;
        if (const auto rec = s.survey(survey_id)) {
          out["ledger"] = ledger_json(rec->ledger);
        }
      }
      std::cout << out.dump(2) << "\n";
    } else if (via->parsed()) {
      const auto project = annotations::load_via(annotations_path);
      for (const auto & w : project.warnings) {
        std::cerr << "warning: " << w << "\n";
      }
      survey::BackendConfig bc;
      bc.kind = backend_name;
      bc.annotations = annotations_path;
      bc.command = backend_command;
      const auto backend = survey::make_backend(bc);
      const std::string dir = images_dir.empty() ?
        std::filesystem::path(annotations_path).parent_path().string() : images_dir;
      std::cout << metrics::evaluate_via(project, dir.empty() ? "." : dir, *backend, min_confidence).dump(2) << "\n";
    } else if (serve->parsed()) {
      std::string store_root = store_path;
      std::string cache = cache_root;
      if (!config_path.empty()) {
        const auto config = survey::load_config(config_path);
        if (store_root.empty()) {store_root = config.store_path;}
        if (cache.empty()) {cache = config.cache_root;}
      }
      if (store_root.empty() || cache.empty()) {
        throw ConfigError("review serve needs --store and --cache, or --config");
      }
      store::SpotStore s(store_root);
      const imagery::ImageCache image_cache(cache);
      const review::ReviewService service(s, image_cache);
      review::ReviewServer server(service, static_dir);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "review API listening on http://" << host << ":" << bound << "/api\n";
      server.run();
      g_server = nullptr;
    }
  } catch (const annotations::ViaParseError & e) {
    std::cerr << "error: " << e.what() << " (byte " << e.byte_offset() << ")\n";
    return 2;
  } catch (const ConfigError & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FatalError & e) {
    std::cerr << "fatal: " << e.what() << " (completed coordinates are kept; re-run to resume)\n";
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
