// fails: operator CLI over the ingestion, analytics, plotting, LLM and API layers.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fails/api.hpp"
#include "fails/error.hpp"
#include "fails/ingest.hpp"
#include "fails/llm.hpp"
#include "fails/plot.hpp"
#include "fails/store.hpp"

namespace fs = std::filesystem;
using namespace fails;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

// Problems the operator can fix by changing arguments or input files.
struct UsageError {
  std::string code;
  std::string message;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPrecondition:
    case ErrorCode::kUnknownProvider:
    case ErrorCode::kUnknownService:
    case ErrorCode::kUnknownGroup:
    case ErrorCode::kIoError:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kRowInvalid:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kClientAuth:
      return kExitUser;
    default:
      return kExitInternal;
  }
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::size_t pos = 0;
    while (pos <= item.size()) {
      const auto comma = item.find(',', pos);
      const auto end = comma == std::string::npos ? item.size() : comma;
      std::string part = item.substr(pos, end - pos);
      part.erase(0, part.find_first_not_of(" \t"));
      part.erase(part.find_last_not_of(" \t") + 1);
      if (!part.empty()) out.push_back(part);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return out;
}

// Date-only upper bounds include the whole day, as in the HTTP API.
Timestamp parse_bound(const std::string& text, bool upper) {
  if (text.size() == 10) {
    if (auto t = Timestamp::parse_iso(text + "T00:00:00Z")) return upper ? *t + kDay : *t;
  }
  if (auto t = Timestamp::parse_iso(text)) return *t;
  throw UsageError{"BAD_QUERY", fmt::format("'{}' is not a date (YYYY-MM-DD) or UTC timestamp", text)};
}

std::shared_ptr<CompletionClient> make_client(bool mock) {
  if (mock || env_or("FAILS_LLM_MOCK", "0") == "1") return std::make_shared<MockClient>();
  RemoteClient::Config cfg = RemoteClient::config_from_env();
  if (const char* t = std::getenv("FAILS_HTTP_TIMEOUT_SECS")) {
    try {
      cfg.timeout_secs = std::max(1, std::stoi(t));
    } catch (const std::exception&) {
    }
  }
  return std::make_shared<RemoteClient>(cfg);
}

// ---- scrape ----

struct ScrapeArgs {
  std::vector<std::string> providers;
  std::string fixtures;
  std::string out;
  int retries = 3;
  int page_limit = 0;
  bool replace = false;
};

int run_scrape(const ScrapeArgs& a, const std::string& data_file) {
  ScrapeConfig cfg;
  for (const auto& p : split_list(a.providers)) {
    if (builtin_registry().find_provider(p) == nullptr) {
      throw UsageError{"UNKNOWN_PROVIDER", "unknown provider '" + p + "'"};
    }
    cfg.providers.insert(p);
  }
  if (!a.fixtures.empty()) {
    if (!fs::is_directory(a.fixtures)) {
      throw UsageError{"IO_ERROR", "fixture directory '" + a.fixtures + "' does not exist"};
    }
    cfg.fixture_dir = a.fixtures;
  }
  cfg.max_retries = a.retries;
  if (a.page_limit > 0) cfg.page_limit = a.page_limit;

  const PipelineResult result = run_pipeline(cfg);
  for (const auto& [id, s] : result.report.per_provider) {
    std::cout << fmt::format("{:<12} pages={} incidents={} warnings={} errors={}\n", id,
                             s.pages_fetched, s.incidents_parsed, s.warnings.size(), s.errors.size());
    for (const auto& e : s.errors) std::cerr << fmt::format("{}: {}\n", id, e);
  }
  if (result.dataset.records.empty() && result.report.error_count() > 0) {
    std::cerr << "error: NETWORK_EXHAUSTED: no provider produced any incident\n";
    return kExitInternal;
  }

  const fs::path out = a.out.empty() ? fs::path(data_file) : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  IncidentDataset dataset = result.dataset;
  if (!a.replace && fs::exists(out)) {
    const MergeResult merged = merge_datasets(read_dataset(out), result.dataset);
    std::cout << fmt::format("merged: added={} replaced={} unchanged={}\n", merged.report.added,
                             merged.report.replaced, merged.report.unchanged);
    dataset = merged.dataset;
  }
  write_dataset(dataset, out);
  std::cout << fmt::format("wrote {} incidents to {}\n", dataset.records.size(), out.string());
  return kExitOk;
}

// ---- analyze ----

struct AnalyzeArgs {
  std::string kind;
  bool all = false;
  std::string from;
  std::string to;
  std::vector<std::string> services;
  std::string format = "svg";
  std::string out = "plots";
  int width = kDefaultWidth;
  int height = kDefaultHeight;
  bool explain = false;
  bool mock = false;
};

AnalysisSelection selection_for(const IncidentDataset& d, const std::string& from,
                                const std::string& to, const std::vector<std::string>& services) {
  const Registry& reg = builtin_registry();
  AnalysisSelection sel = full_selection(d, reg);
  if (!from.empty()) sel.from = parse_bound(from, false);
  if (!to.empty()) sel.to = parse_bound(to, true);
  const auto names = split_list(services);
  if (!names.empty()) {
    sel.services.clear();
    for (const auto& n : names) {
      if (reg.find_service(n) != nullptr) {
        sel.services.insert(n);
      } else if (reg.find_provider(n) != nullptr) {
        for (const auto& s : reg.service_ids_of(n)) sel.services.insert(s);
      } else {
        throw UsageError{"BAD_QUERY", "unknown service or provider '" + n + "'"};
      }
    }
  }
  if (!(sel.from < sel.to)) throw UsageError{"BAD_QUERY", "--from must be before --to"};
  return sel;
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
}

int run_analyze(const AnalyzeArgs& a, const std::string& data_file) {
  const bool all = a.all || a.kind == "all";
  if (!all && a.kind.empty()) throw UsageError{"BAD_QUERY", "pass --kind NAME, --kind all or --all"};
  std::vector<PlotKind> kinds;
  if (all) {
    kinds.assign(all_plot_kinds().begin(), all_plot_kinds().end());
  } else {
    auto k = plot_kind_from_name(a.kind);
    if (!k) throw UsageError{"UNKNOWN_KIND", "unknown plot kind '" + a.kind + "'"};
    kinds.push_back(*k);
  }
  const auto format = image_format_from_name(a.format);
  if (!format) throw UsageError{"BAD_QUERY", "--format must be svg or png"};

  const IncidentDataset d = read_dataset(data_file);
  const AnalysisSelection sel = selection_for(d, a.from, a.to, a.services);
  fs::create_directories(a.out);

  PlotBundle bundle;
  std::size_t written = 0;
  for (PlotKind k : kinds) {
    PlotSpec spec;
    try {
      spec = build_plot_spec(k, d, sel);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientData || !all) throw;
      std::cerr << fmt::format("skipped {}: {}\n", plot_kind_name(k), e.what());
      continue;
    }
    RenderedPlot plot = render(spec, *format, a.width, a.height);
    const fs::path file = fs::path(a.out) / plot_file_name(k, sel, *format);
    write_file(file, plot.bytes);
    std::cout << file.string() << "\n";
    ++written;
    if (a.explain) {
      // The completion service reads raster images.
      RenderedPlot png = *format == ImageFormat::kPng ? plot : render(spec, ImageFormat::kPng);
      bundle.emplace(k, std::make_pair(std::move(png), std::move(spec)));
    }
  }
  if (written == 0) throw Error(ErrorCode::kInsufficientData, "no plot kind has data in this selection");
  if (a.explain) {
    const auto client = make_client(a.mock);
    const std::string text = bundle.size() == 1
                                 ? analyze_plot(*client, bundle.begin()->second.first,
                                                bundle.begin()->second.second)
                                 : analyze_all(*client, bundle);
    std::cout << "\n" << text << "\n";
  }
  return kExitOk;
}

// ---- summary ----

int run_summary(const std::string& data_file, bool as_json) {
  const IncidentDataset d = read_dataset(data_file);
  const auto rows = dataset_summary(d);
  if (as_json) {
    std::cout << "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      std::cout << fmt::format(
          "{}{{\"provider\":\"{}\",\"first_date\":\"{}\",\"last_date\":\"{}\",\"reports\":{},"
          "\"maintenance\":{}}}",
          i == 0 ? "" : ",", r.provider, r.first_date, r.last_date, r.reports, r.maintenance);
    }
    std::cout << "]\n";
    return kExitOk;
  }
  std::cout << fmt::format("{:<16} {:<10} {:<10} {:>7} {:>11}\n", "Provider", "First", "Last",
                           "Reports", "Maintenance");
  std::size_t total = 0;
  for (const auto& r : rows) {
    std::cout << fmt::format("{:<16} {:<10} {:<10} {:>7} {:>11}\n",
                             builtin_registry().provider(r.provider).display_name, r.first_date,
                             r.last_date, r.reports, r.maintenance);
    total += r.reports;
  }
  std::cout << fmt::format("{:<16} {:<10} {:<10} {:>7}\n", "Total", "", "", total);
  return kExitOk;
}

// ---- chat ----

int run_chat(const std::string& data_file, bool mock, const std::vector<std::string>& messages,
             std::size_t budget) {
  const IncidentDataset d = read_dataset(data_file);
  const auto client = make_client(mock);
  ChatSession session = start_chat_session("cli", build_dataset_digest(d, budget));
  auto turn = [&](const std::string& msg) {
    ChatResult r = chat(*client, session, msg);
    session = std::move(r.session);
    std::cout << r.reply << (r.reply.empty() || r.reply.back() != '\n' ? "\n" : "");
  };
  if (!messages.empty()) {
    for (const auto& m : messages) turn(m);
    return kExitOk;
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line == "/quit" || line == "/exit") break;
    turn(line);
  }
  return kExitOk;
}

// ---- serve ----

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string fixtures;
  bool mock = false;
};

int run_serve(const ServeArgs& a, const std::string& data_file) {
  ApiConfig cfg;
  cfg.data_file = data_file;
  if (!a.fixtures.empty()) cfg.scrape.fixture_dir = a.fixtures;
  const int port = a.port > 0 ? a.port : std::stoi(env_or("FAILS_PORT", "8000"));

  // SIGINT and SIGTERM are taken by a watcher thread instead of a handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ApiService api(cfg, make_client(a.mock));
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    api.stop();
  });
  watcher.detach();
  std::cerr << fmt::format("serving {} on http://{}:{}\n", data_file, a.host, port);
  if (!api.serve(a.host, port)) {
    std::cerr << fmt::format("error: IO_ERROR: cannot listen on {}:{}\n", a.host, port);
    return kExitUser;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collect LLM status-page incidents, analyze reliability and serve the results."};
  app.require_subcommand(1);
  std::string data_file = env_or("FAILS_DATA_FILE", "data/incidents.csv");
  app.add_option("--data", data_file, "Dataset CSV file (env FAILS_DATA_FILE)");

  ScrapeArgs scrape_args;
  auto* scrape = app.add_subcommand("scrape", "Fetch incident histories and store the dataset");
  scrape->add_option("--providers", scrape_args.providers, "Provider ids, comma separated")
      ->delimiter(',');
  scrape->add_option("--fixtures", scrape_args.fixtures, "Replay saved pages from this directory");
  scrape->add_option("--out", scrape_args.out, "Output CSV (defaults to --data)");
  scrape->add_option("--retries", scrape_args.retries, "Retries per page")->check(CLI::Range(0, 10));
  scrape->add_option("--page-limit", scrape_args.page_limit, "Maximum history pages per provider")
      ->check(CLI::NonNegativeNumber);
  scrape->add_flag("--replace", scrape_args.replace, "Overwrite instead of merging");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Render plots and optionally interpret them");
  analyze->add_option("--kind", analyze_args.kind, "Plot kind name or 'all'");
  analyze->add_flag("--all", analyze_args.all, "Render all 17 kinds");
  analyze->add_option("--from", analyze_args.from, "Start date (YYYY-MM-DD)");
  analyze->add_option("--to", analyze_args.to, "End date, inclusive (YYYY-MM-DD)");
  analyze->add_option("--services", analyze_args.services, "Service or provider ids, comma separated")
      ->delimiter(',');
  analyze->add_option("--format", analyze_args.format, "svg or png");
  analyze->add_option("--out", analyze_args.out, "Output directory");
  analyze->add_option("--width", analyze_args.width, "Image width")->check(CLI::Range(200, 4000));
  analyze->add_option("--height", analyze_args.height, "Image height")->check(CLI::Range(150, 4000));
  analyze->add_flag("--explain", analyze_args.explain, "Ask the completion service to interpret the plots");
  analyze->add_flag("--mock", analyze_args.mock, "Use the offline mock completion client");

  bool summary_json = false;
  auto* summary = app.add_subcommand("summary", "Per-provider incident summary");
  summary->add_flag("--json", summary_json, "Print JSON");

  bool chat_mock = false;
  std::vector<std::string> chat_messages;
  std::size_t chat_budget = 6000;
  auto* chat_cmd = app.add_subcommand("chat", "Ask questions about the dataset (reads stdin)");
  chat_cmd->add_flag("--mock", chat_mock, "Use the offline mock completion client");
  chat_cmd->add_option("-m,--message", chat_messages, "Send this message instead of reading stdin");
  chat_cmd->add_option("--budget", chat_budget, "Digest token budget")
      ->check(CLI::Range(static_cast<std::size_t>(kMinTokenBudget), static_cast<std::size_t>(1000000)));

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Port (env FAILS_PORT, default 8000)")
      ->check(CLI::Range(1, 65535));
  serve->add_option("--fixtures", serve_args.fixtures, "Scrape jobs replay this fixture directory");
  serve->add_flag("--mock", serve_args.mock, "Use the offline mock completion client");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*scrape) return run_scrape(scrape_args, data_file);
    if (*analyze) return run_analyze(analyze_args, data_file);
    if (*summary) return run_summary(data_file, summary_json);
    if (*chat_cmd) return run_chat(data_file, chat_mock, chat_messages, chat_budget);
    if (*serve) return run_serve(serve_args, data_file);
  } catch (const UsageError& e) {
    std::cerr << fmt::format("error: {}: {}\n", e.code, e.message);
    return kExitUser;
  } catch (const Error& e) {
    std::cerr << fmt::format("error: {}: {}\n", e.token(), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error: INTERNAL: {}\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
