#include <doctest.h>

#include <map>
#include <mutex>

#include "fails/error.hpp"
#include "fails/ingest.hpp"

using namespace fails;

namespace {

// Scripted transport: each URL answers from a queue, the last answer repeats.
class ScriptedFetcher final : public Fetcher {
 public:
  void script(const std::string& url, std::vector<HttpResponse> answers) {
    std::lock_guard lock(mu_);
    answers_[url] = std::move(answers);
  }
  HttpResponse get(const std::string& url) override {
    std::lock_guard lock(mu_);
    ++calls_[url];
    auto it = answers_.find(url);
    if (it == answers_.end()) return {404, "", ""};
    auto& q = it->second;
    HttpResponse r = q.front();
    if (q.size() > 1) q.erase(q.begin());
    return r;
  }
  int calls(const std::string& url) {
    std::lock_guard lock(mu_);
    return calls_[url];
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<HttpResponse>> answers_;
  std::map<std::string, int> calls_;
};

struct SleepLog {
  std::mutex mu;
  std::vector<Seconds> waits;
  Sleeper sleeper() {
    return [this](Seconds s) {
      std::lock_guard lock(mu);
      waits.push_back(s);
    };
  }
};

const std::string kOneIncident = R"({"incidents":[{"id":"i1","name":"ChatGPT down",
  "created_at":"2024-01-01T00:00:00Z","started_at":"2024-01-01T00:00:00Z",
  "resolved_at":"2024-01-01T01:00:00Z","impact":"minor",
  "incident_updates":[{"status":"resolved","body":"ok","display_at":"2024-01-01T01:00:00Z"},
                      {"status":"investigating","body":"hm","display_at":"2024-01-01T00:00:00Z"}]}]})";

std::string instatus_page(int n) {
  return R"({"incidents":[{"name":"REST API errors )" + std::to_string(n) +
         R"(","started":"2024-01-0)" + std::to_string(n) +
         R"(T00:00:00Z","resolved":"2024-01-0)" + std::to_string(n) +
         R"(T02:00:00Z","impact":"MAJOROUTAGE","components":["REST API"],
  "updates":[{"status":"RESOLVED","message":"ok","started":"2024-01-0)" + std::to_string(n) +
         R"(T02:00:00Z"}]}]})";
}

}  // namespace

TEST_CASE("history page URLs per format") {
  const Registry& reg = builtin_registry();
  CHECK(history_page_url(reg.provider("openai"), 1) ==
        std::optional<std::string>("https://status.openai.com/api/v2/incidents.json"));
  CHECK_FALSE(history_page_url(reg.provider("openai"), 2).has_value());
  CHECK(history_page_url(reg.provider("stabilityai"), 3) ==
        std::optional<std::string>("https://status.stability.ai/history?page=3"));
  CHECK_FALSE(history_page_url(reg.provider("stabilityai"), 0).has_value());
}

TEST_CASE("content sniffing") {
  CHECK(sniff_content_kind("  {\"a\":1}") == ContentKind::kJson);
  CHECK(sniff_content_kind("\n[1]") == ContentKind::kJson);
  CHECK(sniff_content_kind("<!DOCTYPE html>") == ContentKind::kHtml);
  CHECK_FALSE(sniff_content_kind("   ").has_value());
}

TEST_CASE("transient failures are retried with exponential backoff") {
  ScriptedFetcher f;
  const std::string url = "https://status.openai.com/api/v2/incidents.json";
  f.script(url, {{503, "", ""}, {0, "", "connection reset"}, {200, kOneIncident, ""}});
  SleepLog log;
  ScrapeConfig cfg;
  cfg.retry_backoff = Seconds{2};
  const FetchResult res = fetch_history("openai", cfg, f, log.sleeper());
  CHECK(res.errors.empty());
  REQUIRE(res.snapshots.size() == 1);
  CHECK(res.snapshots[0].content_kind == ContentKind::kJson);
  CHECK(log.waits == std::vector<Seconds>{Seconds{2}, Seconds{4}});
  CHECK(f.calls(url) == 3);
  CHECK_FALSE(res.warnings.empty());
}

TEST_CASE("exhausted retries become a NETWORK_EXHAUSTED error") {
  ScriptedFetcher f;
  const std::string url = "https://status.openai.com/api/v2/incidents.json";
  f.script(url, {{500, "", ""}});
  SleepLog log;
  ScrapeConfig cfg;
  cfg.max_retries = 2;
  const FetchResult res = fetch_history("openai", cfg, f, log.sleeper());
  CHECK(res.snapshots.empty());
  REQUIRE(res.errors.size() == 1);
  CHECK(res.errors[0].find("NETWORK_EXHAUSTED") == 0);
  CHECK(f.calls(url) == 3);
  CHECK(log.waits.size() == 2);
}

TEST_CASE("client errors are not retried") {
  ScriptedFetcher f;
  const std::string url = "https://status.openai.com/api/v2/incidents.json";
  f.script(url, {{403, "denied", ""}});
  SleepLog log;
  const FetchResult res = fetch_history("openai", ScrapeConfig{}, f, log.sleeper());
  CHECK(f.calls(url) == 1);
  CHECK(log.waits.empty());
  CHECK(res.errors.size() == 1);
}

TEST_CASE("instatus pagination stops at the first empty page and honours page_limit") {
  ScriptedFetcher f;
  const std::string base = "https://status.stability.ai/history?page=";
  f.script(base + "1", {{200, instatus_page(1), ""}});
  f.script(base + "2", {{200, instatus_page(2), ""}});
  f.script(base + "3", {{200, "{\"incidents\":[]}", ""}});
  SleepLog log;
  ScrapeConfig cfg;
  FetchResult res = fetch_history("stabilityai", cfg, f, log.sleeper());
  CHECK(res.snapshots.size() == 3);
  CHECK(f.calls(base + "4") == 0);

  cfg.page_limit = 1;
  res = fetch_history("stabilityai", cfg, f, log.sleeper());
  CHECK(res.snapshots.size() == 1);
}

TEST_CASE("unknown providers are rejected") {
  ScriptedFetcher f;
  SleepLog log;
  CHECK_THROWS_AS(fetch_history("nope", ScrapeConfig{}, f, log.sleeper()), Error);
}

TEST_CASE("pipeline isolates a failing provider") {
  ScriptedFetcher f;
  f.script("https://status.openai.com/api/v2/incidents.json", {{200, kOneIncident, ""}});
  f.script("https://status.anthropic.com/api/v2/incidents.json",
           {{200, "<html>rate limited</html>", ""}});
  SleepLog log;
  ScrapeConfig cfg;
  cfg.providers = {"openai", "anthropic"};
  const PipelineResult res = run_pipeline(cfg, f, log.sleeper());
  REQUIRE(res.dataset.records.size() == 1);
  CHECK(res.dataset.records[0].provider == "openai");
  CHECK(res.dataset.records[0].services == std::set<std::string>{"openai/chatgpt"});
  CHECK(res.report.per_provider.at("openai").errors.empty());
  CHECK(res.report.per_provider.at("anthropic").errors.size() == 1);
  CHECK(res.report.error_count() == 1);
  CHECK(res.dataset.provenance.count("openai") == 1);
}

TEST_CASE("fixture replay is deterministic and dates the scrape by its latest event") {
  ScrapeConfig cfg;
  cfg.fixture_dir = FAILS_FIXTURE_DIR;
  const PipelineResult a = run_pipeline(cfg);
  const PipelineResult b = run_pipeline(cfg);
  CHECK(a.dataset == b.dataset);
  Timestamp latest;
  for (const auto& r : a.dataset.records) {
    latest = std::max(latest, r.start);
    if (r.end) latest = std::max(latest, *r.end);
    for (const auto& u : r.updates) latest = std::max(latest, u.at);
  }
  CHECK(a.dataset.scraped_at == latest);

  cfg.providers = {"characterai"};
  const PipelineResult one = run_pipeline(cfg);
  CHECK(one.report.per_provider.size() == 1);
  for (const auto& r : one.dataset.records) CHECK(r.provider == "characterai");
}
