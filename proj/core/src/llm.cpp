#include "fails/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "embedded_config.hpp"
#include "fails/error.hpp"
#include "text_util.hpp"

namespace fails {

namespace {

constexpr std::string_view kFactPrefixes[] = {"Plot kind:", "Date range:", "Total incidents:",
                                              "n_incidents=", "Selected services:"};

bool is_fact_line(std::string_view line) {
  return std::any_of(std::begin(kFactPrefixes), std::end(kFactPrefixes),
                     [&](std::string_view p) { return line.substr(0, p.size()) == p; });
}

std::string substitute(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
      text.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return text;
}

void require_substituted(const std::string& text, std::string_view what) {
  const auto open = text.find('{');
  if (open != std::string::npos) {
    const auto close = text.find('}', open);
    throw Error(ErrorCode::kPrecondition,
                fmt::format("{} has an unsubstituted placeholder {}", what,
                            text.substr(open, close == std::string::npos ? 20 : close - open + 1)));
  }
}

std::string date_range_of(const AnalysisSelection& sel) {
  return fmt::format("{} to {}", sel.from.date(), (sel.to - Seconds{1}).date());
}

std::string measures_text(const std::map<std::string, double>& stats) {
  std::string out;
  for (const auto& [k, v] : stats) out += fmt::format("{}={}\n", k, format_measure(v));
  if (!out.empty()) out.pop_back();
  return out;
}

std::string directive(const PromptTemplates& t, int cap) {
  return substitute(t.structure_directive, {{"word_cap", std::to_string(cap)}});
}

std::string checked_reply(const CompletionResponse& response) {
  if (trim(response.text).empty()) {
    throw Error(ErrorCode::kEmptyResponse, "completion service returned an empty reply");
  }
  return response.text;
}

}  // namespace

std::string_view chat_role_name(ChatTurn::Role role) {
  switch (role) {
    case ChatTurn::Role::kSystem: return "system";
    case ChatTurn::Role::kUser: return "user";
    case ChatTurn::Role::kAssistant: return "assistant";
  }
  return "user";
}

CompletionResponse MockClient::complete(const CompletionRequest& request) {
  std::string all = request.system_text + "\n";
  for (const auto& turn : request.history) {
    all += fmt::format("{}: {}\n", chat_role_name(turn.role), turn.text);
  }
  all += request.user_text;
  for (const auto& img : request.images) {
    all += fmt::format("\n[image {} {} bytes]", plot_kind_name(img.kind), img.bytes.size());
  }

  std::string reply = fmt::format("Mock analysis {:016x}\n", fnv1a64(all));
  std::set<std::string> seen;
  for (const auto& raw : split(request.system_text + "\n" + request.user_text, '\n')) {
    const std::string line(trim(raw));
    if (is_fact_line(line) && seen.insert(line).second) reply += line + "\n";
  }
  if (!request.images.empty()) reply += fmt::format("Images received: {}\n", request.images.size());
  if (!request.history.empty()) reply += fmt::format("Prior turns: {}\n", request.history.size());

  CompletionResponse out;
  out.text = reply;
  out.usage.prompt_tokens = static_cast<int>(estimate_tokens(all));
  out.usage.completion_tokens = static_cast<int>(estimate_tokens(reply));
  std::lock_guard<std::mutex> lock(mu_);
  ++count_;
  last_ = request;
  return out;
}

std::size_t MockClient::request_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return count_;
}

std::optional<CompletionRequest> MockClient::last_request() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_;
}

PromptTemplates PromptTemplates::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kPrecondition, std::string("prompt templates: ") + e.what());
  }
  const auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::kPrecondition, fmt::format("prompt templates: missing '{}'", key));
    }
    return j[key].get<std::string>();
  };
  PromptTemplates t;
  t.version = j.value("version", 0);
  t.word_cap = j.value("word_cap", 300);
  t.bulk_word_cap = j.value("bulk_word_cap", 2 * t.word_cap);
  t.system_text = str("system_text");
  t.analysis_template = str("analysis_template");
  t.impact_clause = str("impact_clause");
  t.impact_definition = str("impact_definition");
  t.structure_directive = str("structure_directive");
  t.bulk_template = str("bulk_template");
  t.bulk_directive = str("bulk_directive");
  t.chat_system = str("chat_system");
  if (t.word_cap <= 0 || t.bulk_word_cap <= 0) {
    throw Error(ErrorCode::kPrecondition, "prompt templates: word caps must be positive");
  }
  for (PlotKind kind : all_plot_kinds()) {
    const std::string name(plot_kind_name(kind));
    if (!j.contains("instructions") || !j["instructions"].contains(name)) {
      throw Error(ErrorCode::kPrecondition,
                  fmt::format("prompt templates: no instruction for '{}'", name));
    }
    t.instructions[name] = j["instructions"][name].get<std::string>();
  }
  return t;
}

const PromptTemplates& builtin_prompt_templates() {
  static const PromptTemplates templates = PromptTemplates::from_json(config::kPromptTemplatesJson);
  return templates;
}

std::string format_measure(double value) {
  if (std::isnan(value)) return "n/a";
  if (value == std::floor(value) && std::abs(value) < 1e15) return fmt::format("{:.0f}", value);
  return fmt::format("{:.6g}", value);
}

PlotAnalysisPrompt build_plot_prompt(PlotKind kind, const PlotSpec& spec,
                                     const PromptTemplates& templates) {
  if (spec.kind != kind) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("spec is for '{}', not '{}'", plot_kind_name(spec.kind),
                            plot_kind_name(kind)));
  }
  PlotAnalysisPrompt p;
  p.kind = kind;
  p.instruction = templates.instructions.at(std::string(plot_kind_name(kind)));
  p.date_range = date_range_of(spec.selection);
  p.selected_services = builtin_registry().ordered(spec.selection.services);
  if (kind == PlotKind::kIncidentImpactDistribution) p.impact_definition = templates.impact_definition;
  p.statistical_measures = spec.stats;
  if (p.statistical_measures.count("n_incidents") == 0) p.statistical_measures["n_incidents"] = 0;
  p.structure_directive = directive(templates, templates.word_cap);

  const std::string impact_clause =
      p.impact_definition.empty()
          ? std::string()
          : substitute(templates.impact_clause, {{"impact_definition", p.impact_definition}});
  p.text = substitute(templates.analysis_template,
                      {{"kind", fmt::format("{} ({})", plot_kind_name(kind), plot_kind_title(kind))},
                       {"instruction", p.instruction},
                       {"date_range", p.date_range},
                       {"selected_services", join(p.selected_services, ", ")},
                       {"impact_clause", impact_clause},
                       {"statistical_measures", measures_text(p.statistical_measures)},
                       {"structure_directive", p.structure_directive}});
  require_substituted(p.text, "plot prompt");
  return p;
}

std::string truncate_words(const std::string& text, int max_words) {
  int words = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_word) {
      if (words == max_words) return std::string(trim(text.substr(0, i)));
      ++words;
    }
    in_word = !space;
  }
  return text;
}

std::string analyze_plot(CompletionClient& client, const RenderedPlot& plot, const PlotSpec& spec,
                         const PromptTemplates& templates) {
  if (plot.kind != spec.kind) {
    throw Error(ErrorCode::kPrecondition, "rendered plot and spec are of different kinds");
  }
  const PlotAnalysisPrompt prompt = build_plot_prompt(spec.kind, spec, templates);
  CompletionRequest req;
  req.system_text = templates.system_text;
  req.user_text = prompt.text;
  req.images = {plot};
  req.max_output_tokens = templates.word_cap * 2;
  return truncate_words(checked_reply(client.complete(req)), templates.word_cap);
}

std::string analyze_all(CompletionClient& client, const PlotBundle& plots,
                        const PromptTemplates& templates) {
  if (plots.empty()) throw Error(ErrorCode::kPrecondition, "no plots to analyze");
  CompletionRequest req;
  req.system_text = templates.system_text;
  std::string sections;
  for (const auto& [kind, entry] : plots) {
    const auto& [plot, spec] = entry;
    if (plot.kind != kind || spec.kind != kind) {
      throw Error(ErrorCode::kPrecondition, "plot bundle entry does not match its kind");
    }
    sections += fmt::format(
        "Plot kind: {} ({})\nDate range: {}\nSelected services: {}\nStatistics:\n{}\n\n",
        plot_kind_name(kind), plot_kind_title(kind), date_range_of(spec.selection),
        join(builtin_registry().ordered(spec.selection.services), ", "),
        measures_text(spec.stats));
    req.images.push_back(plot);
  }
  req.user_text = substitute(templates.bulk_template,
                             {{"bulk_directive", templates.bulk_directive},
                              {"plot_count", std::to_string(plots.size())},
                              {"plot_sections", sections},
                              {"structure_directive", directive(templates, templates.bulk_word_cap)}});
  require_substituted(req.user_text, "bulk prompt");
  req.max_output_tokens = templates.bulk_word_cap * 2;
  return truncate_words(checked_reply(client.complete(req)), templates.bulk_word_cap);
}

std::size_t estimate_tokens(std::string_view text) {
  return (text.size() + kCharsPerToken - 1) / kCharsPerToken;
}

ChatSession start_chat_session(std::string session_id, DatasetDigest digest,
                               const PromptTemplates& templates) {
  ChatSession s;
  s.session_id = std::move(session_id);
  s.history.push_back({ChatTurn::Role::kSystem, templates.chat_system + "\n\n" + digest_text(digest)});
  s.digest = std::move(digest);
  return s;
}

ChatResult chat(CompletionClient& client, const ChatSession& session,
                const std::string& user_message) {
  if (session.history.empty() || session.history.front().role != ChatTurn::Role::kSystem) {
    throw Error(ErrorCode::kPrecondition, "chat session has no system turn");
  }
  if (trim(user_message).empty()) {
    throw Error(ErrorCode::kPrecondition, "chat message is empty");
  }
  CompletionRequest req;
  req.system_text = session.history.front().text;
  req.history.assign(session.history.begin() + 1, session.history.end());
  req.user_text = user_message;
  const std::string reply = checked_reply(client.complete(req));

  ChatResult out{reply, session};
  out.session.history.push_back({ChatTurn::Role::kUser, user_message});
  out.session.history.push_back({ChatTurn::Role::kAssistant, reply});
  return out;
}

}  // namespace fails
