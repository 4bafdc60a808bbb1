#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fails/analytics.hpp"
#include "fails/plot.hpp"

namespace fails {

struct ChatTurn {
  enum class Role { kSystem, kUser, kAssistant };
  Role role = Role::kUser;
  std::string text;
  bool operator==(const ChatTurn&) const = default;
};

std::string_view chat_role_name(ChatTurn::Role role);

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  std::vector<ChatTurn> history;  // prior user/assistant turns
  std::vector<RenderedPlot> images;
  int max_output_tokens = 800;
};

struct CompletionUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct CompletionResponse {
  std::string text;
  CompletionUsage usage;
};

/// Implementations must be safe to call from several threads.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  /// Throws Error(kClientError), Error(kClientAuth) or Error(kEmptyResponse).
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

/// Offline client. The reply quotes every fact line found in the request
/// ("Plot kind:", "Date range:", "Total incidents:", "n_incidents=", ...)
/// and a hash of the whole request, so equal requests get equal replies.
class MockClient final : public CompletionClient {
 public:
  CompletionResponse complete(const CompletionRequest& request) override;

  std::size_t request_count() const;
  std::optional<CompletionRequest> last_request() const;

 private:
  mutable std::mutex mu_;
  std::size_t count_ = 0;
  std::optional<CompletionRequest> last_;
};

/// OpenAI-compatible chat-completions client.
class RemoteClient final : public CompletionClient {
 public:
  struct Config {
    std::string api_key;
    std::string model = "gpt-4o-mini";
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    bool debug = false;
    int timeout_secs = 120;
  };

  /// FAILS_LLM_API_KEY, FAILS_LLM_MODEL, FAILS_LLM_ENDPOINT, FAILS_LLM_DEBUG.
  static Config config_from_env();

  explicit RemoteClient(Config config);
  CompletionResponse complete(const CompletionRequest& request) override;

  /// The JSON body sent for a request (no key inside).
  std::string request_body(const CompletionRequest& request) const;

 private:
  Config config_;
};

struct PromptTemplates {
  int version = 0;
  int word_cap = 300;
  int bulk_word_cap = 600;
  std::string system_text;
  std::string analysis_template;
  std::string impact_clause;
  std::string impact_definition;
  std::string structure_directive;
  std::string bulk_template;
  std::string bulk_directive;
  std::string chat_system;
  std::map<std::string, std::string> instructions;  // by plot kind name

  /// Throws Error(kPrecondition) when a field or a kind's instruction is missing.
  static PromptTemplates from_json(std::string_view json);
};

const PromptTemplates& builtin_prompt_templates();

struct PlotAnalysisPrompt {
  PlotKind kind = PlotKind::kWeeklyOverview;
  std::string instruction;
  std::string date_range;
  std::vector<std::string> selected_services;
  std::string impact_definition;  // empty unless the kind plots impact levels
  std::map<std::string, double> statistical_measures;
  std::string structure_directive;
  std::string text;  // the fully substituted prompt
};

/// Formats a statistic the way prompts and digests print it.
std::string format_measure(double value);

PlotAnalysisPrompt build_plot_prompt(PlotKind kind, const PlotSpec& spec,
                                     const PromptTemplates& templates = builtin_prompt_templates());

/// Cuts text after `max_words` whitespace-separated words.
std::string truncate_words(const std::string& text, int max_words);

std::string analyze_plot(CompletionClient& client, const RenderedPlot& plot, const PlotSpec& spec,
                         const PromptTemplates& templates = builtin_prompt_templates());

using PlotBundle = std::map<PlotKind, std::pair<RenderedPlot, PlotSpec>>;

/// One request carrying every plot.
std::string analyze_all(CompletionClient& client, const PlotBundle& plots,
                        const PromptTemplates& templates = builtin_prompt_templates());

inline constexpr std::size_t kCharsPerToken = 4;
std::size_t estimate_tokens(std::string_view text);

struct DigestIndexRow {
  std::string incident_id;
  std::string title;
  Timestamp start;
  std::vector<std::string> services;
};

struct LongestIncident {
  std::string incident_id;
  std::string provider;
  std::string title;
  DurationSecs duration = 0;
};

struct DatasetDigest {
  std::size_t total_incidents = 0;
  std::optional<std::string> first_date;
  std::optional<std::string> last_date;
  std::vector<ProviderSummary> providers;
  std::vector<std::pair<std::string, std::size_t>> service_counts;
  std::vector<LongestIncident> longest;
  std::vector<ImpactDistribution> impact;
  std::vector<DigestIndexRow> index;  // newest rows survive truncation
  std::size_t index_total = 0;
  bool truncated = false;
};

inline constexpr std::size_t kMinTokenBudget = 500;
inline constexpr std::size_t kLongestIncidents = 10;

/// Throws Error(kPrecondition) for budgets below kMinTokenBudget.
DatasetDigest build_dataset_digest(const IncidentDataset& dataset, std::size_t token_budget,
                                   const Registry& registry = builtin_registry());
std::string digest_text(const DatasetDigest& digest);

struct ChatSession {
  std::string session_id;
  std::vector<ChatTurn> history;  // system turn first
  DatasetDigest digest;
};

ChatSession start_chat_session(std::string session_id, DatasetDigest digest,
                               const PromptTemplates& templates = builtin_prompt_templates());

struct ChatResult {
  std::string reply;
  ChatSession session;
};

/// The input session is never modified; on failure nothing is appended.
ChatResult chat(CompletionClient& client, const ChatSession& session,
                const std::string& user_message);

}  // namespace fails
