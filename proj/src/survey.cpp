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
#include <atomic>
#include <condition_variable>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "spotfinder/errors.hpp"
#include "spotfinder/preprocess.hpp"
#include "spotfinder/survey.hpp"

namespace spotfinder::survey
{

namespace
{

/// Serializes calls into a backend that cannot be shared across threads.
class SerializedBackend : public detectors::DetectorBackend
{
public:
  explicit SerializedBackend(const detectors::DetectorBackend & inner)
  : inner_(inner) {}

  std::string id() const override {return inner_.id();}
  bool shareable() const override {return true;}
  double classify_quadrant(const Raster & tile, const std::string & ref) const override
  {
    std::lock_guard lock(mutex_);
    return inner_.classify_quadrant(tile, ref);
  }
  std::vector<Detection> segment_street(const Raster & image, const std::string & ref) const override
  {
    std::lock_guard lock(mutex_);
    return inner_.segment_street(image, ref);
  }

private:
  const detectors::DetectorBackend & inner_;
  mutable std::mutex mutex_;
};

store::ImageSlot make_slot(const imagery::ImageryRequest & request)
{
  store::ImageSlot slot;
  slot.canonical = request.canonical();
  slot.key = request.key();
  slot.heading = request.heading;
  slot.status = "not_requested";
  return slot;
}

class CoordinateProcessor
{
public:
  CoordinateProcessor(
    const SurveyConfig & config, imagery::ImageryClient & client,
    const detectors::DetectorBackend & backend)
  : config_(config), client_(client), backend_(backend) {}

  store::SpotCandidate process(long index, const geo::GeoPoint & point) const
  {
    store::SpotCandidate c;
    c.id = store::candidate_id(config_.survey_id, index);
    c.survey_id = config_.survey_id;
    c.grid_index = index;
    c.point = point;
    c.score.mode = config_.scoring.mode;

    const auto sat_request = imagery::build_satellite_request(point, config_.zoom);
    c.satellite = make_slot(sat_request);
    for (int heading : config_.headings) {
      c.street.push_back(make_slot(imagery::build_street_request(point, heading)));
    }

    try {
      score(c, sat_request);
    } catch (const FatalError &) {
      throw;
    } catch (const std::exception & e) {
      c.outcome = store::Outcome::Failed;
      c.error = e.what();
      c.score = scoring::SpotScore{};
      c.score.mode = config_.scoring.mode;
    }
    return c;
  }

private:
  void observe(store::SpotCandidate & c, const std::string & fetched_at) const
  {
    c.observed_at = std::max(c.observed_at, fetched_at);
  }

  void score(store::SpotCandidate & c, const imagery::ImageryRequest & sat_request) const
  {
    std::optional<SatelliteScore> sat;
    auto sat_result = client_.fetch(sat_request);
    if (auto * img = std::get_if<imagery::CachedImage>(&sat_result)) {
      c.satellite.status = "ok";
      c.satellite.width = img->body.width();
      c.satellite.height = img->body.height();
      observe(c, img->fetched_at);
      Raster base = img->body.width() == preprocess::kSatelliteInput ?
        preprocess::downscale(img->body) : img->body;
      sat = detectors::classify_tile(
        preprocess::split_quadrants(base, sat_request.key()), backend_);
    } else {
      c.satellite.status = "no_coverage";
    }

    std::vector<DetectionSet> heading_sets(c.street.size());
    const bool covered = client_.street_coverage(c.point);
    bool any_street = false;
    for (std::size_t i = 0; i < c.street.size(); ++i) {
      auto & slot = c.street[i];
      heading_sets[i].image = slot.key;
      if (!covered) {
        slot.status = "no_coverage";
        continue;
      }
      const auto request = imagery::build_street_request(c.point, *slot.heading);
      auto result = client_.fetch(request);
      auto * img = std::get_if<imagery::CachedImage>(&result);
      if (img == nullptr) {
        slot.status = "no_coverage";
        continue;
      }
      any_street = true;
      observe(c, img->fetched_at);
      slot.status = "ok";
      slot.width = img->body.width();
      slot.height = img->body.height();
      heading_sets[i] = detectors::segment_street(img->body, slot.key, backend_, config_.min_confidence);
      slot.detections = heading_sets[i].detections;
    }

    c.outcome = any_street ? store::Outcome::Scored : store::Outcome::NoCoverage;
    c.score = scoring::combine(sat, scoring::count_hits(heading_sets), config_.scoring);
  }

  const SurveyConfig & config_;
  imagery::ImageryClient & client_;
  const detectors::DetectorBackend & backend_;
};

}  // namespace

Plan plan_for_count(const SurveyConfig & config, long n_coordinates)
{
  Plan p;
  p.spacing_m = config.resolved_spacing();
  p.per_axis = geo::axis_count(config.half_extent_m, p.spacing_m);
  p.n_coordinates = n_coordinates;
  const auto estimate = imagery::estimate_cost(n_coordinates, config.pricing);
  p.n_requests = estimate.requests;
  p.cost = estimate.cost;
  return p;
}

Plan dry_run(const SurveyConfig & config)
{
  const auto points = geo::make_grid(config.grid());
  return plan_for_count(config, static_cast<long>(points.size()));
}

std::unique_ptr<detectors::DetectorBackend> make_backend(const BackendConfig & config)
{
  if (config.kind == "heuristic") {
    return std::make_unique<detectors::HeuristicBackend>();
  }
  if (config.kind == "fixture") {
    return detectors::FixtureBackend::from_files(config.annotations, config.quadrant_probs);
  }
  if (config.kind == "external") {
    const std::string work = config.work_dir.empty() ?
      (std::filesystem::temp_directory_path() / "spotfinder-detector").string() : config.work_dir;
    return std::make_unique<detectors::ExternalProcessBackend>(config.command, work);
  }
  throw ConfigError("unknown backend kind '" + config.kind + "'");
}

std::unique_ptr<imagery::ImageryProvider> make_provider(const ProviderConfig & config)
{
  if (config.kind == "fixture") {
    return std::make_unique<imagery::FixtureProvider>(config.dir);
  }
  if (config.kind == "network") {
    return std::make_unique<imagery::NetworkProvider>(config.base_url);
  }
  throw ConfigError("unknown provider kind '" + config.kind + "'");
}

RunResult run_survey(
  const SurveyConfig & config, store::SpotStore & store,
  imagery::ImageryProvider & provider, const detectors::DetectorBackend & backend,
  std::shared_ptr<imagery::RateLimiter> limiter, const RunOptions & options)
{
  const auto points = options.points ? *options.points : geo::make_grid(config.grid());
  const long n = static_cast<long>(points.size());
  const long limit = std::min(n, options.index_limit.value_or(n));

  imagery::ImageCache cache(config.cache_root);
  imagery::ImageryClient client(cache, provider, config.pricing, std::move(limiter), config.max_retries);

  std::optional<SerializedBackend> serialized;
  if (!backend.shareable()) {
    serialized.emplace(backend);
  }
  const detectors::DetectorBackend & shared_backend =
    serialized ? static_cast<const detectors::DetectorBackend &>(*serialized) : backend;
  const CoordinateProcessor processor(config, client, shared_backend);

  store::SurveyRecord record;
  if (auto existing = store.survey(config.survey_id)) {
    record = *existing;
  }
  const imagery::CostLedger base_ledger = record.ledger;
  record.id = config.survey_id;
  record.center = config.center;
  record.half_extent_m = config.half_extent_m;
  record.spacing_m = config.resolved_spacing();
  record.zoom = config.zoom;
  record.n_planned = n;
  record.ledger.sat_price = config.pricing.sat_price;
  record.ledger.street_price = config.pricing.street_price;
  store.upsert_survey(record);

  RunResult result;
  result.n_points = n;

  // Indices still to do; completed (or verified) records are left untouched.
  std::vector<long> todo;
  for (long i = 0; i < limit; ++i) {
    const auto existing = store.get(store::candidate_id(config.survey_id, i));
    if (existing && (existing->outcome != store::Outcome::Failed ||
      existing->status != store::Status::Candidate))
    {
      ++result.resumed;
      continue;
    }
    todo.push_back(i);
  }

  std::vector<std::optional<store::SpotCandidate>> done(todo.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;
  const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(todo.size())));
  int running = todo.empty() ? 0 : n_workers;

  auto worker = [&] {
      for (;;) {
        const std::size_t slot = next++;
        if (slot >= todo.size() || abort) {
          {
            std::lock_guard lock(mutex);
            --running;
          }
          ready.notify_all();
          return;
        }
        try {
          auto c = processor.process(todo[slot], points[static_cast<std::size_t>(todo[slot])]);
          std::lock_guard lock(mutex);
          done[slot] = std::move(c);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!fatal) {
            fatal = std::current_exception();
          }
          abort = true;
        }
        ready.notify_all();
      }
    };

  std::vector<std::jthread> pool;
  for (int i = 0; i < n_workers && !todo.empty(); ++i) {
    pool.emplace_back(worker);
  }

  // Commit strictly in grid order so the event log is reproducible.
  std::exception_ptr commit_error;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    std::unique_lock lock(mutex);
    // After an abort, wait for in-flight coordinates so finished work is kept.
    ready.wait(lock, [&] {return done[i].has_value() || (abort && running == 0);});
    if (!done[i]) {
      break;
    }
    auto c = std::move(*done[i]);
    done[i].reset();
    lock.unlock();
    try {
      store.upsert_candidate(c);
    } catch (...) {
      commit_error = std::current_exception();
      abort = true;
      break;
    }
    ++result.processed;
    result.failed += c.outcome == store::Outcome::Failed ? 1 : 0;
  }
  pool.clear();

  record.ledger = client.ledger();
  record.ledger.sat_requests += base_ledger.sat_requests;
  record.ledger.street_requests += base_ledger.street_requests;
  store.upsert_survey(record);

  if (commit_error) {
    std::rethrow_exception(commit_error);
  }
  if (fatal) {
    std::rethrow_exception(fatal);
  }

  result.ledger = record.ledger;
  result.client = client.stats();
  result.stats = store.stats(config.survey_id);
  return result;
}

RunResult run_survey(const SurveyConfig & config, const RunOptions & options)
{
  store::SpotStore store(config.store_path);
  auto provider = make_provider(config.provider);
  auto backend = make_backend(config.backend);
  auto limiter = std::make_shared<imagery::RateLimiter>(
    config.max_in_flight, std::chrono::milliseconds(config.min_spacing_ms));
  return run_survey(config, store, *provider, *backend, limiter, options);
}

}  // namespace spotfinder::survey
