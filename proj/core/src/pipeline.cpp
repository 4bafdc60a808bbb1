#include <algorithm>
#include <future>
#include <set>

#include "fails/error.hpp"
#include "fails/ingest.hpp"

namespace fails {

namespace {

struct ProviderStage {
  std::string provider;
  std::vector<IncidentRecord> records;
  ProviderScrapeStats stats;
  std::string provenance;
};

ProviderStage scrape_provider(const std::string& provider_id,
                              const ScrapeConfig& config, Fetcher& fetcher,
                              const Sleeper& sleep, const Registry& registry) {
  ProviderStage stage;
  stage.provider = provider_id;
  FetchResult fetched;
  try {
    fetched = fetch_history(provider_id, config, fetcher, sleep, registry);
  } catch (const Error& e) {
    stage.stats.errors.push_back(std::string(e.token()) + ": " + e.what());
    return stage;
  }
  stage.stats.pages_fetched = static_cast<int>(fetched.snapshots.size());
  stage.stats.warnings = std::move(fetched.warnings);
  stage.stats.errors = std::move(fetched.errors);
  if (config.fixture_dir) {
    stage.provenance = "fixtures:" + *config.fixture_dir + "/" + provider_id;
  } else {
    stage.provenance = "live:" + registry.provider(provider_id).base_url;
  }

  std::set<std::string> seen;
  for (const auto& snap : fetched.snapshots) {
    ParseResult parsed;
    try {
      parsed = parse_snapshot(snap, registry);
    } catch (const Error& e) {
      stage.stats.errors.push_back(std::string(e.token()) + ": " + e.what());
      continue;
    }
    for (auto& w : parsed.warnings) stage.stats.warnings.push_back(std::move(w));
    for (auto& r : parsed.records) {
      ++stage.stats.incidents_parsed;
      if (!seen.insert(r.incident_id).second) {
        stage.stats.warnings.push_back(r.incident_id +
                                       ": repeated on a later page, first copy kept");
        continue;
      }
      const auto issues = validate_incident(r, registry);
      for (const auto& issue : issues) {
        const std::string line = r.incident_id + ": " + issue.code + " " + issue.message;
        if (issue.severity == IssueSeverity::kError) {
          stage.stats.errors.push_back("dropped " + line);
        } else {
          stage.stats.warnings.push_back(line);
        }
      }
      if (!has_errors(issues)) stage.records.push_back(std::move(r));
    }
  }
  return stage;
}

Timestamp latest_event(const std::vector<ProviderStage>& stages) {
  Timestamp latest;
  for (const auto& s : stages) {
    for (const auto& r : s.records) {
      latest = std::max(latest, r.start);
      if (r.end) latest = std::max(latest, *r.end);
      for (const auto& u : r.updates) latest = std::max(latest, u.at);
    }
  }
  return latest;
}

}  // namespace

PipelineResult run_pipeline(const ScrapeConfig& config, Fetcher& fetcher,
                            const Sleeper& sleep, const Registry& registry) {
  PipelineResult out;
  out.report.started_at = Timestamp::now();

  std::vector<std::string> providers;
  if (config.providers.empty()) {
    for (const auto& p : registry.providers()) providers.push_back(p.id);
  } else {
    providers.assign(config.providers.begin(), config.providers.end());
  }

  std::vector<std::future<ProviderStage>> workers;
  workers.reserve(providers.size());
  for (const auto& id : providers) {
    workers.push_back(std::async(std::launch::async, [&, id] {
      return scrape_provider(id, config, fetcher, sleep, registry);
    }));
  }
  std::vector<ProviderStage> stages;
  for (auto& w : workers) stages.push_back(w.get());

  // Merge runs after every worker finished, in provider order.
  std::set<std::string> ids;
  for (auto& stage : stages) {
    auto& stats = out.report.per_provider[stage.provider];
    stats = std::move(stage.stats);
    if (!stage.provenance.empty()) out.dataset.provenance[stage.provider] = stage.provenance;
    for (auto& r : stage.records) {
      if (!ids.insert(r.incident_id).second) {
        stats.errors.push_back("dropped " + r.incident_id +
                               ": id already used by another provider");
        continue;
      }
      out.dataset.records.push_back(std::move(r));
    }
  }
  out.dataset.sort_records();
  out.dataset.scraped_at = config.fixture_dir ? latest_event(stages) : Timestamp::now();
  out.report.finished_at = std::max(Timestamp::now(), out.report.started_at);
  return out;
}

PipelineResult run_pipeline(const ScrapeConfig& config, const Registry& registry) {
  HttpFetcher fetcher;
  return run_pipeline(config, fetcher, real_sleeper(), registry);
}

}  // namespace fails
