#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fails/model.hpp"
#include "fails/registry.hpp"

namespace fails {

enum class ContentKind { kHtml, kJson };

struct PageSnapshot {
  std::string provider;
  std::string url;
  Timestamp fetched_at;
  std::string body;
  ContentKind content_kind = ContentKind::kHtml;
};

/// Classifies a body by its first non-blank byte: `{`/`[` is JSON, `<` HTML.
std::optional<ContentKind> sniff_content_kind(std::string_view body);

struct ScrapeConfig {
  std::set<std::string> providers;
  int max_retries = 3;
  Seconds retry_backoff{2};
  std::optional<int> page_limit;
  std::optional<std::string> fixture_dir;
};

struct ProviderScrapeStats {
  int pages_fetched = 0;
  int incidents_parsed = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
};

struct ScrapeReport {
  std::map<std::string, ProviderScrapeStats> per_provider;
  Timestamp started_at;
  Timestamp finished_at;

  std::size_t error_count() const;
};

struct HttpResponse {
  int status = 0;  // 0 means the request never completed
  std::string body;
  std::string error;
};

/// Transport used by fetch_history; swapped for fakes in tests.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

/// cpp-httplib backed fetcher. Timeout comes from FAILS_HTTP_TIMEOUT_SECS
/// (default 30 s).
class HttpFetcher final : public Fetcher {
 public:
  HttpFetcher();
  HttpResponse get(const std::string& url) override;

 private:
  int timeout_secs_;
};

using Sleeper = std::function<void(Seconds)>;
Sleeper real_sleeper();

struct FetchResult {
  std::vector<PageSnapshot> snapshots;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
};

/// Page URL for a 1-based page index, or nullopt past the last page the
/// provider's format exposes.
std::optional<std::string> history_page_url(const Provider& provider, int page);

/// Collects a provider's history pages. In fixture mode the files under
/// `<fixture_dir>/<provider>/` are replayed in lexicographic order and the
/// fetcher is not used. Throws Error(kUnknownProvider).
FetchResult fetch_history(const std::string& provider_id,
                          const ScrapeConfig& config, Fetcher& fetcher,
                          const Sleeper& sleep,
                          const Registry& registry = builtin_registry());

struct ParseResult {
  std::vector<IncidentRecord> records;
  std::vector<std::string> warnings;
};

/// Throws Error(kMalformedPage) naming the missing element.
ParseResult parse_statuspage_history(const PageSnapshot& snapshot,
                                     const Registry& registry = builtin_registry());
ParseResult parse_instatus_history(const PageSnapshot& snapshot,
                                   const Registry& registry = builtin_registry());
/// Dispatches on the provider's page format.
ParseResult parse_snapshot(const PageSnapshot& snapshot,
                           const Registry& registry = builtin_registry());

struct ServiceMatch {
  std::set<std::string> services;
  bool provider_wide = false;  // nothing matched; all services assumed
};

ServiceMatch identify_services(const std::string& provider_id,
                               const std::vector<std::string>& explicit_tags,
                               std::string_view description,
                               const Registry& registry = builtin_registry());

/// Maps a source status word ("Investigating", "RESOLVED", "update", ...)
/// to a stage. nullopt means "no stage of its own" (e.g. a plain update).
std::optional<RecoveryStage> stage_from_status(std::string_view status);

struct PipelineResult {
  IncidentDataset dataset;
  ScrapeReport report;
};

/// Fetch, parse, validate and merge every configured provider. Providers
/// run concurrently; failures are reported, never thrown.
PipelineResult run_pipeline(const ScrapeConfig& config,
                            const Registry& registry = builtin_registry());
PipelineResult run_pipeline(const ScrapeConfig& config, Fetcher& fetcher,
                            const Sleeper& sleep,
                            const Registry& registry = builtin_registry());

}  // namespace fails
