// Statuspage-family pages come in two shapes:
//  * the public JSON API (`/api/v2/incidents.json`), and
//  * month-grouped history markup (`div.months-container > div.month >
//    div.incident-container`), with per-update status and local timestamps.
#include <json.hpp>

#include "fails/error.hpp"
#include "fails/ingest.hpp"
#include "fails/timeparse.hpp"
#include "html.hpp"
#include "parse_common.hpp"
#include "text_util.hpp"

namespace fails {

namespace {

using nlohmann::json;

std::string json_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

ParseResult parse_statuspage_json(const PageSnapshot& snapshot,
                                  const Registry& registry) {
  const Provider& provider = registry.provider(snapshot.provider);
  json doc;
  try {
    doc = json::parse(snapshot.body);
  } catch (const json::parse_error& e) {
    detail::malformed(snapshot, std::string("valid JSON (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("incidents") ||
      !doc["incidents"].is_array()) {
    detail::malformed(snapshot, "'incidents' array");
  }

  ParseResult result;
  const auto& incidents = doc["incidents"];
  if (incidents.empty()) {
    result.warnings.push_back(snapshot.url + ": empty incident history");
    return result;
  }
  for (const auto& inc : incidents) {
    const std::string id = json_string(inc, "id");
    if (id.empty()) detail::malformed(snapshot, "incident 'id'");
    const std::string created = json_string(inc, "created_at");
    const std::string started = json_string(inc, "started_at");
    if (created.empty() && started.empty()) {
      detail::malformed(snapshot, "'created_at' for incident " + id);
    }

    IncidentRecord r;
    r.incident_id = id;
    r.provider = provider.id;
    r.title = json_string(inc, "name");
    r.source_url = detail::origin_of(provider.base_url) + "/incidents/" + id;
    r.start = normalize_timestamp(started.empty() ? created : started,
                                  provider.assumed_zone);

    std::vector<detail::SourceUpdate> updates;
    std::vector<std::string> tags;
    if (auto it = inc.find("incident_updates"); it != inc.end() && it->is_array()) {
      for (const auto& u : *it) {
        std::string when = json_string(u, "display_at");
        if (when.empty()) when = json_string(u, "created_at");
        if (when.empty()) detail::malformed(snapshot, "update time in incident " + id);
        updates.push_back({json_string(u, "status"),
                           normalize_timestamp(when, provider.assumed_zone),
                           json_string(u, "body")});
        if (auto ac = u.find("affected_components"); ac != u.end() && ac->is_array()) {
          for (const auto& c : *ac) tags.push_back(json_string(c, "name"));
        }
      }
    }
    if (auto it = inc.find("components"); it != inc.end() && it->is_array()) {
      for (const auto& c : *it) tags.push_back(json_string(c, "name"));
    }
    const std::string postmortem = json_string(inc, "postmortem_published_at");
    if (!postmortem.empty()) {
      updates.push_back({"postmortem",
                         normalize_timestamp(postmortem, provider.assumed_zone),
                         json_string(inc, "postmortem_body")});
    }
    detail::apply_updates(r, std::move(updates), result.warnings);

    const std::string resolved = json_string(inc, "resolved_at");
    if (!resolved.empty()) {
      r.end = normalize_timestamp(resolved, provider.assumed_zone);
    } else if (const auto& s4 = r.stage_time(RecoveryStage::kResolved)) {
      r.end = s4;
    }
    const std::string impact = json_string(inc, "impact");
    detail::apply_impact(r, registry, impact.empty() ? "none" : impact,
                         result.warnings);
    detail::apply_services(r, registry, tags, result.warnings);
    result.records.push_back(std::move(r));
  }
  return result;
}

std::string slug_from_href(const std::string& href) {
  std::string path = href;
  if (auto q = path.find_first_of("?#"); q != std::string::npos) path.resize(q);
  while (!path.empty() && path.back() == '/') path.pop_back();
  const auto slash = path.rfind('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string color_from_style(const std::string& style) {
  const std::string lower = ascii_lower(style);
  for (const auto& decl : split(lower, ';')) {
    const auto colon = decl.find(':');
    if (colon == std::string::npos) continue;
    if (trim(std::string_view(decl).substr(0, colon)) == "color") {
      return std::string(trim(std::string_view(decl).substr(colon + 1)));
    }
  }
  return {};
}

ParseResult parse_statuspage_html(const PageSnapshot& snapshot,
                                  const Registry& registry) {
  const Provider& provider = registry.provider(snapshot.provider);
  const html::Node doc = html::parse(snapshot.body);
  const html::Node* months = html::find_first_by_class(doc, "months-container");
  if (months == nullptr) detail::malformed(snapshot, "div.months-container");

  ParseResult result;
  const auto containers = html::find_by_class(*months, "incident-container");
  if (containers.empty()) {
    result.warnings.push_back(snapshot.url + ": empty incident history");
    return result;
  }
  // Replayed fixtures carry a fixture:// url; links resolve against the provider.
  const std::string origin = detail::origin_of(
      snapshot.url.rfind("http", 0) == 0 ? snapshot.url : provider.base_url);
  for (const html::Node* c : containers) {
    const html::Node* title_div = html::find_first_by_class(*c, "incident-title");
    if (title_div == nullptr) detail::malformed(snapshot, "div.incident-title");
    const html::Node* link = html::find_first_tag(*title_div, "a");
    if (link == nullptr || link->attr("href") == nullptr) {
      detail::malformed(snapshot, "incident link in div.incident-title");
    }
    const std::string href = *link->attr("href");

    IncidentRecord r;
    r.provider = provider.id;
    r.incident_id = slug_from_href(href);
    if (r.incident_id.empty()) detail::malformed(snapshot, "incident slug in href");
    r.title = collapse_whitespace(html::text_content(*link));
    r.source_url = href.rfind("http", 0) == 0 ? href : origin + href;
    if (const auto* style = link->attr("style")) {
      r.impact_color = color_from_style(*style);
    }

    std::string impact_label = "none";
    if (const auto* cls = title_div->attr("class")) {
      for (const auto& token : split(*cls, ' ')) {
        if (token.rfind("impact-", 0) == 0) impact_label = token.substr(7);
      }
    }

    std::vector<std::string> tags;
    for (const html::Node* comp : html::find_by_class(*c, "component")) {
      tags.push_back(collapse_whitespace(html::text_content(*comp)));
    }

    std::vector<detail::SourceUpdate> updates;
    for (const html::Node* u : html::find_by_class(*c, "update")) {
      const html::Node* status = html::find_first_by_class(*u, "update-status");
      const html::Node* when = html::find_first_by_class(*u, "update-timestamp");
      if (status == nullptr || when == nullptr) {
        detail::malformed(snapshot, "update-status/update-timestamp in incident " +
                                        r.incident_id);
      }
      const html::Node* body = html::find_first_by_class(*u, "update-body");
      updates.push_back(
          {collapse_whitespace(html::text_content(*status)),
           normalize_timestamp(collapse_whitespace(html::text_content(*when)),
                               provider.assumed_zone),
           body == nullptr ? std::string()
                           : std::string(trim(html::text_content(*body)))});
    }
    if (updates.empty()) {
      detail::malformed(snapshot, "div.update in incident " + r.incident_id);
    }
    detail::apply_updates(r, std::move(updates), result.warnings);
    r.start = r.updates.front().at;
    for (const auto& u : r.updates) {
      if (u.stage == RecoveryStage::kResolved) r.end = u.at;
    }
    detail::apply_impact(r, registry, impact_label, result.warnings);
    detail::apply_services(r, registry, tags, result.warnings);
    result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace

ParseResult parse_statuspage_history(const PageSnapshot& snapshot,
                                     const Registry& registry) {
  if (snapshot.content_kind == ContentKind::kJson) {
    return parse_statuspage_json(snapshot, registry);
  }
  return parse_statuspage_html(snapshot, registry);
}

}  // namespace fails
