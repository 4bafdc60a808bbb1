#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fails/ingest.hpp"
#include "fails/llm.hpp"
#include "fails/store.hpp"

namespace httplib {
class Server;
}

namespace fails {

struct ApiRequest {
  std::string method;  // "GET", "POST", ...
  std::string path;    // without the query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

enum class JobState { kPending, kRunning, kSucceeded, kFailed };
std::string_view job_state_name(JobState state);

struct ScrapeJob {
  std::string job_id;
  JobState state = JobState::kPending;
  std::optional<ScrapeReport> report;
  std::optional<MergeReport> merge;
  std::vector<std::string> errors;
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
};

using ScrapeRunner = std::function<PipelineResult(const ScrapeConfig&)>;

struct ApiConfig {
  std::filesystem::path data_file = "data/incidents.csv";
  ScrapeConfig scrape;  // template for POST /api/scrape
  std::size_t digest_token_budget = 6000;
  std::string cors_origin = "*";
};

/// The HTTP surface. `handle` is the whole request dispatcher, so it can be
/// exercised without sockets; `serve` wraps it in an httplib server.
class ApiService {
 public:
  ApiService(ApiConfig config, std::shared_ptr<CompletionClient> client,
             ScrapeRunner runner = {}, const Registry& registry = builtin_registry());
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  ApiResponse handle(const ApiRequest& request);

  /// Blocks until stop() is called or the socket fails. Returns false when
  /// the port cannot be bound.
  bool serve(const std::string& host, int port);
  void stop();
  /// Port actually bound by serve(), 0 before that.
  int bound_port() const { return bound_port_.load(); }

  /// Test hook: waits until the job leaves Pending/Running.
  std::optional<ScrapeJob> wait_for_job(const std::string& job_id,
                                        std::chrono::milliseconds timeout);

 private:
  struct Loaded;
  struct Session;

  std::shared_ptr<const Loaded> current();
  ApiResponse route(const ApiRequest& request);
  ApiResponse post_scrape(const ApiRequest& request);
  ApiResponse get_scrape(const std::string& job_id);
  ApiResponse get_incidents(const ApiRequest& request);
  ApiResponse get_plot(const ApiRequest& request, const std::string& kind, bool spec_only);
  ApiResponse post_analyze(const ApiRequest& request, const std::string& kind);
  ApiResponse post_analyze_all(const ApiRequest& request);
  ApiResponse post_chat(const ApiRequest& request);
  ApiResponse get_summary();
  void run_job(std::string job_id, ScrapeConfig config);

  ApiConfig config_;
  std::shared_ptr<CompletionClient> client_;
  ScrapeRunner runner_;
  const Registry& registry_;

  std::mutex data_mu_;
  std::shared_ptr<const Loaded> loaded_;

  std::mutex jobs_mu_;
  std::condition_variable jobs_cv_;
  std::map<std::string, ScrapeJob> jobs_;
  std::vector<std::thread> workers_;
  std::size_t next_job_ = 1;

  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_session_ = 1;

  std::mutex server_mu_;
  httplib::Server* server_ = nullptr;  // set while serve() runs
  bool stop_requested_ = false;
  std::atomic<int> bound_port_{0};
};

}  // namespace fails
