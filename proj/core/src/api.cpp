#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "fails/api.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fails/error.hpp"
#include "text_util.hpp"

namespace fails {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxPageSize = 500;
constexpr std::size_t kDefaultPageSize = 50;

struct ApiFail {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void bad_query(const std::string& message) { throw ApiFail{400, "BAD_QUERY", message}; }

ApiResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump(-1, ' ', false, json::error_handler_t::replace)};
}

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  return json_response(status, {{"code", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInsufficientData: return 422;
    case ErrorCode::kClientError:
    case ErrorCode::kClientAuth:
    case ErrorCode::kEmptyResponse: return 502;
    case ErrorCode::kPrecondition:
    case ErrorCode::kUnknownProvider:
    case ErrorCode::kUnknownService:
    case ErrorCode::kUnknownGroup: return 400;
    default: return 500;
  }
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::string> get(const std::map<std::string, std::string>& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

// Date-only bounds cover whole days: `to=2024-01-31` includes that day.
Timestamp parse_bound(const std::string& text, bool upper) {
  if (text.size() == 10) {
    if (auto t = Timestamp::parse_iso(text + "T00:00:00Z")) return upper ? *t + kDay : *t;
  }
  if (auto t = Timestamp::parse_iso(text)) return *t;
  bad_query(fmt::format("'{}' is not a date (YYYY-MM-DD) or UTC timestamp", text));
}

std::size_t parse_count(const std::string& text, const std::string& name) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v < 1) bad_query(fmt::format("{} must be a positive integer", name));
  return static_cast<std::size_t>(v);
}

std::string latest_stage(const IncidentRecord& r) {
  for (auto it = kAllStages.rbegin(); it != kAllStages.rend(); ++it) {
    if (r.stage_time(*it)) return std::string(stage_name(*it));
  }
  return r.end ? "resolved" : "open";
}

json record_json(const IncidentRecord& r, const Registry& registry) {
  json stages = json::object();
  for (RecoveryStage s : kAllStages) {
    const auto& t = r.stage_time(s);
    stages[std::string(stage_name(s))] = t ? json(t->iso()) : json(nullptr);
  }
  json updates = json::array();
  for (const auto& u : r.updates) {
    updates.push_back({{"stage", stage_name(u.stage)}, {"at", u.at.iso()}, {"body", u.body}});
  }
  return {{"incident_id", r.incident_id},
          {"provider", r.provider},
          {"services", registry.ordered(r.services)},
          {"title", r.title},
          {"impact", impact_level_name(r.impact.level)},
          {"severity", r.impact.severity},
          {"impact_color", r.impact_color},
          {"start", r.start.iso()},
          {"end", r.end ? json(r.end->iso()) : json(nullptr)},
          {"duration_secs", r.end ? json((*r.end - r.start).count()) : json(nullptr)},
          {"status", latest_stage(r)},
          {"stage_times", stages},
          {"updates", updates},
          {"source_url", r.source_url ? json(*r.source_url) : json(nullptr)}};
}

json report_json(const ScrapeReport& report) {
  json providers = json::object();
  for (const auto& [id, s] : report.per_provider) {
    providers[id] = {{"pages_fetched", s.pages_fetched},
                     {"incidents_parsed", s.incidents_parsed},
                     {"warnings", s.warnings},
                     {"errors", s.errors}};
  }
  return {{"started_at", report.started_at.iso()},
          {"finished_at", report.finished_at.iso()},
          {"error_count", report.error_count()},
          {"providers", providers}};
}

json job_json(const ScrapeJob& job) {
  json j = {{"job_id", job.job_id}, {"state", job_state_name(job.state)}, {"errors", job.errors}};
  j["started_at"] = job.started_at ? json(job.started_at->iso()) : json(nullptr);
  j["finished_at"] = job.finished_at ? json(job.finished_at->iso()) : json(nullptr);
  j["report"] = job.report ? report_json(*job.report) : json(nullptr);
  if (job.merge) {
    j["merge"] = {{"added", job.merge->added},
                  {"replaced", job.merge->replaced},
                  {"unchanged", job.merge->unchanged},
                  {"conflicts", job.merge->conflicts}};
  } else {
    j["merge"] = nullptr;
  }
  return j;
}

// Query parameters, with fields of a JSON object body layered on top.
std::map<std::string, std::string> merged_params(const ApiRequest& request) {
  auto params = request.query;
  if (trim(request.body).empty()) return params;
  json body;
  try {
    body = json::parse(request.body);
  } catch (const json::exception&) {
    throw ApiFail{400, "BAD_REQUEST", "request body is not valid JSON"};
  }
  if (!body.is_object()) throw ApiFail{400, "BAD_REQUEST", "request body must be a JSON object"};
  for (const auto& [key, value] : body.items()) {
    if (value.is_string()) {
      params[key] = value.get<std::string>();
    } else if (value.is_array()) {
      std::vector<std::string> parts;
      for (const auto& v : value) {
        if (v.is_string()) parts.push_back(v.get<std::string>());
      }
      params[key] = join(parts, ",");
    }
  }
  return params;
}

}  // namespace

std::string_view job_state_name(JobState state) {
  switch (state) {
    case JobState::kPending: return "pending";
    case JobState::kRunning: return "running";
    case JobState::kSucceeded: return "succeeded";
    case JobState::kFailed: return "failed";
  }
  return "pending";
}

struct ApiService::Loaded {
  IncidentDataset dataset;
  std::string hash;
  mutable std::mutex digest_mu;
  mutable std::optional<DatasetDigest> digest;
};

struct ApiService::Session {
  std::mutex mu;
  ChatSession chat;
  std::string dataset_hash;
};

ApiService::ApiService(ApiConfig config, std::shared_ptr<CompletionClient> client,
                       ScrapeRunner runner, const Registry& registry)
    : config_(std::move(config)),
      client_(std::move(client)),
      runner_(std::move(runner)),
      registry_(registry) {
  if (!runner_) {
    runner_ = [this](const ScrapeConfig& c) { return run_pipeline(c, registry_); };
  }
}

ApiService::~ApiService() {
  stop();
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

std::shared_ptr<const ApiService::Loaded> ApiService::current() {
  const fs::path& path = config_.data_file;
  std::string hash = "absent";
  if (fs::exists(path)) {
    const std::string bytes = read_bytes(path) + "\n--meta--\n" + read_bytes(metadata_path(path));
    hash = fmt::format("{:016x}", fnv1a64(bytes));
  }
  std::lock_guard<std::mutex> lock(data_mu_);
  if (loaded_ && loaded_->hash == hash) return loaded_;
  auto fresh = std::make_shared<Loaded>();
  fresh->hash = hash;
  if (hash != "absent") fresh->dataset = read_dataset(path, registry_);
  loaded_ = fresh;
  return loaded_;
}

ApiResponse ApiService::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const ApiFail& f) {
    return error_response(f.status, f.code, f.message);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.token(), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "INTERNAL", e.what());
  }
}

ApiResponse ApiService::route(const ApiRequest& request) {
  const auto parts = split(request.path, '/');
  std::vector<std::string> seg;
  for (const auto& p : parts) {
    if (!p.empty()) seg.push_back(p);
  }
  const std::string& m = request.method;
  auto method_is = [&](std::string_view want) {
    if (m != want) {
      throw ApiFail{405, "METHOD_NOT_ALLOWED", fmt::format("{} does not accept {}", request.path, m)};
    }
  };
  if (seg.size() < 2 || seg[0] != "api") {
    throw ApiFail{404, "NOT_FOUND", "no route for " + request.path};
  }
  const std::string& head = seg[1];
  if (head == "scrape" && seg.size() == 2) {
    method_is("POST");
    return post_scrape(request);
  }
  if (head == "scrape" && seg.size() == 3) {
    method_is("GET");
    return get_scrape(seg[2]);
  }
  if (head == "incidents" && seg.size() == 2) {
    method_is("GET");
    return get_incidents(request);
  }
  if (head == "plots" && (seg.size() == 3 || (seg.size() == 4 && seg[3] == "spec"))) {
    method_is("GET");
    return get_plot(request, seg[2], seg.size() == 4);
  }
  if (head == "analyze" && seg.size() == 3) {
    method_is("POST");
    return post_analyze(request, seg[2]);
  }
  if (head == "analyze-all" && seg.size() == 2) {
    method_is("POST");
    return post_analyze_all(request);
  }
  if (head == "chat" && seg.size() == 2) {
    method_is("POST");
    return post_chat(request);
  }
  if (head == "summary" && seg.size() == 2) {
    method_is("GET");
    return get_summary();
  }
  if (head == "kinds" && seg.size() == 2) {
    method_is("GET");
    json kinds = json::array();
    for (PlotKind k : all_plot_kinds()) {
      kinds.push_back({{"kind", plot_kind_name(k)}, {"title", plot_kind_title(k)}});
    }
    return json_response(200, kinds);
  }
  if (head == "health" && seg.size() == 2) {
    method_is("GET");
    return json_response(200, {{"status", "ok"}});
  }
  throw ApiFail{404, "NOT_FOUND", "no route for " + request.path};
}

ApiResponse ApiService::post_scrape(const ApiRequest& request) {
  ScrapeConfig cfg = config_.scrape;
  const auto params = merged_params(request);
  if (auto providers = get(params, "providers")) {
    cfg.providers.clear();
    for (const auto& p : split(*providers, ',')) {
      const std::string id(trim(p));
      if (id.empty()) continue;
      if (registry_.find_provider(id) == nullptr) bad_query("unknown provider '" + id + "'");
      cfg.providers.insert(id);
    }
  }
  std::string id;
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    for (const auto& [jid, job] : jobs_) {
      if (job.state == JobState::kPending || job.state == JobState::kRunning) {
        throw ApiFail{409, "SCRAPE_IN_PROGRESS", "scrape job " + jid + " is still running"};
      }
    }
    id = fmt::format("job-{:04d}", next_job_++);
    jobs_[id].job_id = id;
    workers_.emplace_back(&ApiService::run_job, this, id, cfg);
  }
  return json_response(202, {{"job_id", id}});
}

void ApiService::run_job(std::string job_id, ScrapeConfig config) {
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    auto& job = jobs_[job_id];
    job.state = JobState::kRunning;
    job.started_at = Timestamp::now();
  }
  ScrapeJob outcome;
  try {
    PipelineResult result = runner_(config);
    outcome.report = result.report;
    for (const auto& [provider, stats] : result.report.per_provider) {
      for (const auto& e : stats.errors) outcome.errors.push_back(provider + ": " + e);
    }
    if (result.dataset.records.empty() && result.report.error_count() > 0) {
      outcome.state = JobState::kFailed;
    } else {
      IncidentDataset base;
      const bool had_file = fs::exists(config_.data_file);
      if (had_file) base = read_dataset(config_.data_file, registry_);
      MergeResult merged = had_file ? merge_datasets(base, result.dataset)
                                    : MergeResult{result.dataset, {result.dataset.records.size(), 0, 0, {}}};
      if (config_.data_file.has_parent_path()) fs::create_directories(config_.data_file.parent_path());
      write_dataset(merged.dataset, config_.data_file);
      outcome.merge = merged.report;
      outcome.state = JobState::kSucceeded;
    }
  } catch (const std::exception& e) {
    outcome.state = JobState::kFailed;
    outcome.errors.push_back(e.what());
  }
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    auto& job = jobs_[job_id];
    job.state = outcome.state;
    job.report = std::move(outcome.report);
    job.merge = std::move(outcome.merge);
    job.errors = std::move(outcome.errors);
    job.finished_at = Timestamp::now();
  }
  jobs_cv_.notify_all();
}

ApiResponse ApiService::get_scrape(const std::string& job_id) {
  std::lock_guard<std::mutex> lock(jobs_mu_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw ApiFail{404, "UNKNOWN_JOB", "no scrape job '" + job_id + "'"};
  return json_response(200, job_json(it->second));
}

std::optional<ScrapeJob> ApiService::wait_for_job(const std::string& job_id,
                                                  std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(jobs_mu_);
  const bool done = jobs_cv_.wait_for(lock, timeout, [&] {
    const auto it = jobs_.find(job_id);
    return it != jobs_.end() && (it->second.state == JobState::kSucceeded ||
                                 it->second.state == JobState::kFailed);
  });
  if (!done) return std::nullopt;
  return jobs_.at(job_id);
}

namespace {

AnalysisSelection selection_from(const std::map<std::string, std::string>& params,
                                 const IncidentDataset& dataset, const Registry& registry) {
  AnalysisSelection sel = full_selection(dataset, registry);
  if (auto from = get(params, "from")) sel.from = parse_bound(*from, false);
  if (auto to = get(params, "to")) sel.to = parse_bound(*to, true);
  if (auto services = get(params, "services")) {
    sel.services.clear();
    for (const auto& raw : split(*services, ',')) {
      const std::string id(trim(raw));
      if (id.empty()) continue;
      if (registry.find_service(id) != nullptr) {
        sel.services.insert(id);
      } else if (registry.find_provider(id) != nullptr) {
        for (const auto& s : registry.service_ids_of(id)) sel.services.insert(s);
      } else {
        bad_query("unknown service or provider '" + id + "'");
      }
    }
    if (sel.services.empty()) bad_query("services must name at least one service");
  }
  if (!(sel.from < sel.to)) bad_query("from must be before to");
  return sel;
}

PlotKind kind_from(const std::string& name) {
  auto kind = plot_kind_from_name(name);
  if (!kind) throw ApiFail{404, "UNKNOWN_KIND", "unknown plot kind '" + name + "'"};
  return *kind;
}

}  // namespace

ApiResponse ApiService::get_incidents(const ApiRequest& request) {
  const auto data = current();
  const auto& q = request.query;
  const auto provider = get(q, "provider");
  const auto service = get(q, "service");
  if (provider && registry_.find_provider(*provider) == nullptr) {
    bad_query("unknown provider '" + *provider + "'");
  }
  if (service && registry_.find_service(*service) == nullptr) {
    bad_query("unknown service '" + *service + "'");
  }
  std::optional<Timestamp> from, to;
  if (auto v = get(q, "from")) from = parse_bound(*v, false);
  if (auto v = get(q, "to")) to = parse_bound(*v, true);
  if (from && to && !(*from < *to)) bad_query("from must be before to");
  const std::string sort = get(q, "sort").value_or("start");
  const std::string order = get(q, "order").value_or("asc");
  if (sort != "start" && sort != "end" && sort != "duration" && sort != "provider" &&
      sort != "impact") {
    bad_query("unknown sort key '" + sort + "'");
  }
  if (order != "asc" && order != "desc") bad_query("order must be asc or desc");
  const std::size_t page = get(q, "page") ? parse_count(*get(q, "page"), "page") : 1;
  const std::size_t page_size =
      get(q, "page_size") ? parse_count(*get(q, "page_size"), "page_size") : kDefaultPageSize;
  if (page_size > kMaxPageSize) bad_query(fmt::format("page_size must be at most {}", kMaxPageSize));

  std::vector<const IncidentRecord*> rows;
  for (const auto& r : data->dataset.records) {
    if (provider && r.provider != *provider) continue;
    if (service && r.services.count(*service) == 0) continue;
    if (from && r.start < *from) continue;
    if (to && !(r.start < *to)) continue;
    rows.push_back(&r);
  }
  const bool desc = order == "desc";
  // Missing values (open incidents) sort last in either direction.
  auto cmp = [&](const IncidentRecord* a, const IncidentRecord* b) {
    auto by = [&](auto ka, auto kb) -> int {
      if (ka < kb) return desc ? 1 : -1;
      if (kb < ka) return desc ? -1 : 1;
      return 0;
    };
    int c = 0;
    if (sort == "start") {
      c = by(a->start, b->start);
    } else if (sort == "provider") {
      c = by(a->provider, b->provider);
    } else if (sort == "impact") {
      c = by(a->impact.severity, b->impact.severity);
    } else {
      const bool ha = a->end.has_value(), hb = b->end.has_value();
      if (ha != hb) return ha;
      if (ha) {
        c = sort == "end" ? by(*a->end, *b->end) : by(*a->end - a->start, *b->end - b->start);
      }
    }
    if (c != 0) return c < 0;
    if (a->start != b->start) return a->start < b->start;
    return a->incident_id < b->incident_id;
  };
  std::sort(rows.begin(), rows.end(), cmp);

  json items = json::array();
  const std::size_t first = (page - 1) * page_size;
  for (std::size_t i = first; i < rows.size() && i < first + page_size; ++i) {
    items.push_back(record_json(*rows[i], registry_));
  }
  return json_response(200, {{"total", rows.size()},
                             {"page", page},
                             {"page_size", page_size},
                             {"sort", sort},
                             {"order", order},
                             {"items", items}});
}

ApiResponse ApiService::get_plot(const ApiRequest& request, const std::string& kind_name,
                                 bool spec_only) {
  const PlotKind kind = kind_from(kind_name);
  const auto data = current();
  const AnalysisSelection sel = selection_from(request.query, data->dataset, registry_);
  ImageFormat format = ImageFormat::kSvg;
  if (auto f = get(request.query, "format")) {
    auto parsed = image_format_from_name(*f);
    if (!parsed) bad_query("format must be svg or png");
    format = *parsed;
  }
  const PlotSpec spec = build_plot_spec(kind, data->dataset, sel, registry_);
  if (spec_only) return {200, "application/json", plot_spec_json(spec)};
  RenderedPlot plot = render(spec, format);
  return {200, std::string(image_format_mime(format)), std::move(plot.bytes)};
}

ApiResponse ApiService::post_analyze(const ApiRequest& request, const std::string& kind_name) {
  const PlotKind kind = kind_from(kind_name);
  const auto data = current();
  const auto params = merged_params(request);
  const AnalysisSelection sel = selection_from(params, data->dataset, registry_);
  const PlotSpec spec = build_plot_spec(kind, data->dataset, sel, registry_);
  const RenderedPlot plot = render(spec, ImageFormat::kPng);
  const std::string text = analyze_plot(*client_, plot, spec);
  return json_response(200, {{"kind", plot_kind_name(kind)}, {"analysis", text}});
}

ApiResponse ApiService::post_analyze_all(const ApiRequest& request) {
  const auto data = current();
  const auto params = merged_params(request);
  const AnalysisSelection sel = selection_from(params, data->dataset, registry_);
  std::vector<PlotKind> kinds;
  if (auto names = get(params, "kinds")) {
    for (const auto& n : split(*names, ',')) {
      const std::string name(trim(n));
      if (!name.empty()) kinds.push_back(kind_from(name));
    }
  } else {
    kinds.assign(all_plot_kinds().begin(), all_plot_kinds().end());
  }
  if (kinds.empty()) bad_query("kinds must name at least one plot kind");
  RenderBatch batch = render_all(data->dataset, sel, kinds, ImageFormat::kPng, registry_);
  json skipped = json::object();
  for (const auto& [k, why] : batch.skipped) skipped[std::string(plot_kind_name(k))] = why;
  if (batch.plots.empty()) {
    throw Error(ErrorCode::kInsufficientData, "no plot kind has data in this selection");
  }
  PlotBundle bundle;
  json analyzed = json::array();
  for (auto& [k, plot] : batch.plots) {
    bundle.emplace(k, std::make_pair(std::move(plot), batch.specs.at(k)));
    analyzed.push_back(plot_kind_name(k));
  }
  const std::string text = analyze_all(*client_, bundle);
  return json_response(200, {{"analysis", text}, {"kinds", analyzed}, {"skipped", skipped}});
}

ApiResponse ApiService::post_chat(const ApiRequest& request) {
  json body;
  try {
    body = json::parse(request.body.empty() ? std::string("{}") : request.body);
  } catch (const json::exception&) {
    throw ApiFail{400, "BAD_REQUEST", "request body is not valid JSON"};
  }
  if (!body.is_object() || !body.contains("message") || !body["message"].is_string() ||
      trim(body["message"].get<std::string>()).empty()) {
    throw ApiFail{400, "BAD_REQUEST", "body must carry a non-empty 'message'"};
  }
  const std::string message = body["message"].get<std::string>();
  const auto data = current();
  const auto digest = [&] {
    std::lock_guard<std::mutex> lock(data->digest_mu);
    if (!data->digest) {
      data->digest = build_dataset_digest(data->dataset, config_.digest_token_budget, registry_);
    }
    return *data->digest;
  };

  std::shared_ptr<Session> session;
  if (body.contains("session_id") && body["session_id"].is_string()) {
    const std::string id = body["session_id"].get<std::string>();
    std::lock_guard<std::mutex> lock(sessions_mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiFail{404, "UNKNOWN_SESSION", "no chat session '" + id + "'"};
    session = it->second;
  } else {
    session = std::make_shared<Session>();
    session->chat = start_chat_session("", digest());
    session->dataset_hash = data->hash;
    std::lock_guard<std::mutex> lock(sessions_mu_);
    session->chat.session_id =
        fmt::format("chat-{:04d}-{}", next_session_++, data->hash.substr(0, 8));
    sessions_[session->chat.session_id] = session;
  }

  std::lock_guard<std::mutex> lock(session->mu);
  ChatSession working = session->chat;
  if (session->dataset_hash != data->hash) {
    // The dataset changed since the last turn: swap in a fresh digest and
    // keep the conversation.
    ChatSession refreshed = start_chat_session(working.session_id, digest());
    refreshed.history.insert(refreshed.history.end(), working.history.begin() + 1,
                             working.history.end());
    working = std::move(refreshed);
  }
  ChatResult result = chat(*client_, working, message);
  session->chat = std::move(result.session);
  session->dataset_hash = data->hash;
  return json_response(200, {{"session_id", session->chat.session_id}, {"reply", result.reply}});
}

ApiResponse ApiService::get_summary() {
  const auto data = current();
  json rows = json::array();
  for (const auto& s : dataset_summary(data->dataset, registry_)) {
    rows.push_back({{"provider", s.provider},
                    {"display_name", registry_.provider(s.provider).display_name},
                    {"first_date", s.first_date},
                    {"last_date", s.last_date},
                    {"reports", s.reports},
                    {"maintenance", s.maintenance}});
  }
  return json_response(200, rows);
}

bool ApiService::serve(const std::string& host, int port) {
  httplib::Server server;
  const auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.body = req.body;
    ApiResponse out = handle(r);
    res.status = out.status;
    res.set_content(std::move(out.body), out.content_type);
  };
  server.Get(R"(/.*)", adapter);
  server.Post(R"(/.*)", adapter);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  {
    std::lock_guard<std::mutex> lock(server_mu_);
    if (stop_requested_) return true;
    server_ = &server;
  }
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  bool ok = bound > 0;
  if (ok) {
    bound_port_ = bound;
    ok = server.listen_after_bind();
  }
  std::lock_guard<std::mutex> lock(server_mu_);
  server_ = nullptr;
  bound_port_ = 0;
  return ok || stop_requested_;
}

void ApiService::stop() {
  std::lock_guard<std::mutex> lock(server_mu_);
  stop_requested_ = true;
  if (server_ != nullptr) server_->stop();
}

}  // namespace fails
