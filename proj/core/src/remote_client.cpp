#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <iostream>

#include <fmt/format.h>
#include <json.hpp>

#include "fails/error.hpp"
#include "fails/llm.hpp"
#include "parse_common.hpp"
#include "text_util.hpp"

namespace fails {

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

std::string redact(std::string text, const std::string& key) {
  if (key.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), "[REDACTED]");
    pos += 10;
  }
  return text;
}

}  // namespace

RemoteClient::Config RemoteClient::config_from_env() {
  Config c;
  c.api_key = env_or("FAILS_LLM_API_KEY", "");
  c.model = env_or("FAILS_LLM_MODEL", c.model);
  c.endpoint = env_or("FAILS_LLM_ENDPOINT", c.endpoint);
  c.debug = env_or("FAILS_LLM_DEBUG", "0") == "1";
  return c;
}

RemoteClient::RemoteClient(Config config) : config_(std::move(config)) {}

std::string RemoteClient::request_body(const CompletionRequest& request) const {
  using nlohmann::json;
  json messages = json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  for (const auto& turn : request.history) {
    messages.push_back({{"role", chat_role_name(turn.role)}, {"content", turn.text}});
  }
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.user_text}});
  for (const auto& img : request.images) {
    if (img.format == ImageFormat::kPng) {
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64_encode(img.bytes)}}}});
    } else {
      // Vision endpoints take raster images only; SVG goes in as markup.
      content.push_back({{"type", "text"},
                         {"text", fmt::format("SVG source of the {} plot:\n{}",
                                              plot_kind_name(img.kind), img.bytes)}});
    }
  }
  messages.push_back({{"role", "user"}, {"content", content}});
  json body = {{"model", config_.model},
               {"messages", messages},
               {"max_tokens", request.max_output_tokens}};
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

CompletionResponse RemoteClient::complete(const CompletionRequest& request) {
  if (config_.api_key.empty()) {
    throw Error(ErrorCode::kClientAuth, "FAILS_LLM_API_KEY is not set");
  }
  const std::string origin = detail::origin_of(config_.endpoint);
  if (origin.empty()) {
    throw Error(ErrorCode::kClientError, "invalid LLM endpoint '" + config_.endpoint + "'");
  }
  std::string path = config_.endpoint.substr(origin.size());
  if (path.empty()) path = "/";
  const std::string body = request_body(request);
  if (config_.debug) std::clog << "[llm] POST " << config_.endpoint << "\n" << body << "\n";

  httplib::Client client(origin);
  client.set_connection_timeout(30, 0);
  client.set_read_timeout(config_.timeout_secs, 0);
  client.set_bearer_token_auth(config_.api_key);
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kClientError,
                "LLM request failed: " + httplib::to_string(res.error()));
  }
  if (config_.debug) {
    std::clog << "[llm] status " << res->status << "\n" << redact(res->body, config_.api_key) << "\n";
  }
  if (res->status == 401 || res->status == 403) {
    throw Error(ErrorCode::kClientAuth, fmt::format("LLM service rejected the key ({})", res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kClientError,
                fmt::format("LLM service answered {}: {}", res->status,
                            redact(res->body.substr(0, 300), config_.api_key)));
  }
  CompletionResponse out;
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& choices = j.at("choices");
    if (!choices.empty() && choices[0].contains("message") &&
        choices[0]["message"].value("content", nlohmann::json()).is_string()) {
      out.text = choices[0]["message"]["content"].get<std::string>();
    }
    if (j.contains("usage")) {
      out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      out.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kClientError, std::string("unreadable LLM response: ") + e.what());
  }
  if (trim(out.text).empty()) {
    throw Error(ErrorCode::kEmptyResponse, "LLM service returned an empty completion");
  }
  return out;
}

}  // namespace fails
