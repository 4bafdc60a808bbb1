#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "fails/error.hpp"
#include "fails/ingest.hpp"
#include "parse_common.hpp"

namespace fails {

namespace fs = std::filesystem;

std::optional<ContentKind> sniff_content_kind(std::string_view body) {
  for (char c : body) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    if (c == '{' || c == '[') return ContentKind::kJson;
    if (c == '<') return ContentKind::kHtml;
    return std::nullopt;
  }
  return std::nullopt;
}

std::size_t ScrapeReport::error_count() const {
  std::size_t n = 0;
  for (const auto& [id, stats] : per_provider) n += stats.errors.size();
  return n;
}

HttpFetcher::HttpFetcher() : timeout_secs_(30) {
  if (const char* env = std::getenv("FAILS_HTTP_TIMEOUT_SECS")) {
    try {
      timeout_secs_ = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
    }
  }
}

HttpResponse HttpFetcher::get(const std::string& url) {
  const std::string origin = detail::origin_of(url);
  if (origin.empty()) return {0, {}, "not an absolute URL: " + url};
  const std::string path = url.substr(origin.size()).empty() ? "/" : url.substr(origin.size());
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_secs_, 0);
  client.set_read_timeout(timeout_secs_, 0);
  client.set_follow_location(true);
  client.set_default_headers({{"User-Agent", "fails-scraper/1.0"}});
  auto res = client.Get(path);
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

Sleeper real_sleeper() {
  return [](Seconds d) { std::this_thread::sleep_for(d); };
}

std::optional<std::string> history_page_url(const Provider& provider, int page) {
  if (page < 1) return std::nullopt;
  switch (provider.page_format) {
    case PageFormat::kStatuspage:
      // The public API exposes the recent history as one document.
      if (page > 1) return std::nullopt;
      return provider.base_url + "/api/v2/incidents.json";
    case PageFormat::kInstatus:
      return provider.base_url + "/history?page=" + std::to_string(page);
  }
  return std::nullopt;
}

namespace {

constexpr int kMaxLivePages = 50;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FetchResult replay_fixtures(const Provider& provider, const ScrapeConfig& config) {
  FetchResult out;
  const fs::path dir = fs::path(*config.fixture_dir) / provider.id;
  if (!fs::is_directory(dir)) {
    out.warnings.push_back("no fixture directory " + dir.string());
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".html" || ext == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  for (const auto& file : files) {
    if (config.page_limit && static_cast<int>(out.snapshots.size()) >= *config.page_limit) {
      break;
    }
    PageSnapshot snap;
    snap.provider = provider.id;
    snap.url = "fixture://" + provider.id + "/" + file.filename().string();
    snap.body = read_file(file);
    snap.content_kind = file.extension() == ".json" ? ContentKind::kJson : ContentKind::kHtml;
    if (snap.body.empty()) {
      out.errors.push_back(snap.url + ": empty page body");
      continue;
    }
    const auto sniffed = sniff_content_kind(snap.body);
    if (sniffed && *sniffed != snap.content_kind) {
      out.warnings.push_back(snap.url + ": content does not match extension");
      snap.content_kind = *sniffed;
    }
    out.snapshots.push_back(std::move(snap));
  }
  return out;
}

}  // namespace

FetchResult fetch_history(const std::string& provider_id,
                          const ScrapeConfig& config, Fetcher& fetcher,
                          const Sleeper& sleep, const Registry& registry) {
  const Provider& provider = registry.provider(provider_id);
  if (config.fixture_dir) return replay_fixtures(provider, config);

  FetchResult out;
  const int limit = config.page_limit.value_or(kMaxLivePages);
  for (int page = 1; page <= limit; ++page) {
    const auto url = history_page_url(provider, page);
    if (!url) break;
    HttpResponse res;
    bool ok = false;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) {
        sleep(config.retry_backoff * (1 << (attempt - 1)));
      }
      res = fetcher.get(*url);
      const bool retryable = res.status == 0 || res.status == 429 || res.status >= 500;
      if (!retryable) {
        ok = true;
        if (attempt > 0) {
          out.warnings.push_back(*url + ": succeeded after " + std::to_string(attempt) +
                                 " retr" + (attempt == 1 ? "y" : "ies"));
        }
        break;
      }
    }
    if (!ok) {
      out.errors.push_back(std::string(error_code_token(ErrorCode::kNetworkExhausted)) +
                           ": " + *url + " failed after " +
                           std::to_string(config.max_retries + 1) + " attempts (" +
                           (res.status == 0 ? res.error : "HTTP " + std::to_string(res.status)) +
                           ")");
      break;
    }
    if (res.status == 404 && page > 1) break;
    if (res.status >= 400) {
      out.errors.push_back(*url + ": HTTP " + std::to_string(res.status));
      break;
    }
    if (res.body.empty()) {
      out.warnings.push_back(*url + ": empty body, stopping pagination");
      break;
    }
    PageSnapshot snap;
    snap.provider = provider.id;
    snap.url = *url;
    snap.fetched_at = Timestamp::now();
    snap.content_kind = sniff_content_kind(res.body).value_or(ContentKind::kHtml);
    snap.body = std::move(res.body);
    // A page without incidents (or one we cannot read) ends the history.
    bool more = false;
    try {
      more = !parse_snapshot(snap, registry).records.empty();
    } catch (const Error&) {
    }
    out.snapshots.push_back(std::move(snap));
    if (!more) break;
  }
  return out;
}

}  // namespace fails
