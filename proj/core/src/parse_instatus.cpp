// Instatus pages embed their incident list as JSON, either as a bare
// document (`{"incidents": [...]}`) or inside the Next.js bootstrap script
// (`<script id="__NEXT_DATA__">` -> props.pageProps.incidents).
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

const json& incident_array(const PageSnapshot& snapshot, const json& doc) {
  if (doc.is_object()) {
    if (auto it = doc.find("incidents"); it != doc.end() && it->is_array()) {
      return *it;
    }
    const json* props = nullptr;
    if (auto p = doc.find("props"); p != doc.end() && p->is_object()) {
      if (auto pp = p->find("pageProps"); pp != p->end() && pp->is_object()) {
        props = &*pp;
      }
    }
    if (props != nullptr) {
      if (auto it = props->find("incidents"); it != props->end() && it->is_array()) {
        return *it;
      }
    }
  }
  detail::malformed(snapshot, "props.pageProps.incidents array");
}

std::string instatus_id(const std::string& provider, const std::string& title,
                        Timestamp start) {
  return "inst-" + sha256_hex(provider + "\n" + title + "\n" + start.iso()).substr(0, 16);
}

}  // namespace

ParseResult parse_instatus_history(const PageSnapshot& snapshot,
                                   const Registry& registry) {
  const Provider& provider = registry.provider(snapshot.provider);
  std::string payload;
  if (snapshot.content_kind == ContentKind::kJson) {
    payload = snapshot.body;
  } else {
    const html::Node doc = html::parse(snapshot.body);
    std::vector<const html::Node*> scripts;
    html::find_all(
        doc,
        [](const html::Node& n) {
          const auto* id = n.attr("id");
          return n.tag == "script" && id != nullptr && *id == "__NEXT_DATA__";
        },
        scripts);
    if (scripts.empty()) detail::malformed(snapshot, "script#__NEXT_DATA__");
    payload = scripts.front()->text;
  }

  json doc;
  try {
    doc = json::parse(payload);
  } catch (const json::parse_error& e) {
    detail::malformed(snapshot, std::string("valid embedded JSON (") + e.what() + ")");
  }
  const json& incidents = incident_array(snapshot, doc);

  ParseResult result;
  if (incidents.empty()) {
    result.warnings.push_back(snapshot.url + ": empty incident history");
    return result;
  }
  for (const auto& inc : incidents) {
    const std::string started = json_string(inc, "started");
    if (started.empty()) detail::malformed(snapshot, "incident 'started'");

    IncidentRecord r;
    r.provider = provider.id;
    r.title = json_string(inc, "name");
    r.start = normalize_timestamp(started, provider.assumed_zone);
    const std::string url = json_string(inc, "url");
    if (!url.empty()) {
      std::string slug = url;
      while (!slug.empty() && slug.back() == '/') slug.pop_back();
      r.incident_id = slug.substr(slug.rfind('/') + 1);
      r.source_url = url;
    } else {
      r.incident_id = instatus_id(provider.id, r.title, r.start);
    }

    std::vector<detail::SourceUpdate> updates;
    if (auto it = inc.find("updates"); it != inc.end() && it->is_array()) {
      for (const auto& u : *it) {
        const std::string when = json_string(u, "started");
        if (when.empty()) {
          detail::malformed(snapshot, "update 'started' in incident " + r.incident_id);
        }
        updates.push_back({json_string(u, "status"),
                           normalize_timestamp(when, provider.assumed_zone),
                           json_string(u, "message")});
      }
    }
    detail::apply_updates(r, std::move(updates), result.warnings);

    const std::string resolved = json_string(inc, "resolved");
    if (!resolved.empty()) {
      r.end = normalize_timestamp(resolved, provider.assumed_zone);
    } else if (const auto& s4 = r.stage_time(RecoveryStage::kResolved)) {
      r.end = s4;
    }

    std::vector<std::string> tags;
    if (auto it = inc.find("components"); it != inc.end() && it->is_array()) {
      for (const auto& c : *it) {
        tags.push_back(c.is_string() ? c.get<std::string>() : json_string(c, "name"));
      }
    }
    const std::string impact = json_string(inc, "impact");
    detail::apply_impact(r, registry, impact.empty() ? "OPERATIONAL" : impact,
                         result.warnings);
    detail::apply_services(r, registry, tags, result.warnings);
    result.records.push_back(std::move(r));
  }
  return result;
}

ParseResult parse_snapshot(const PageSnapshot& snapshot, const Registry& registry) {
  const Provider& provider = registry.provider(snapshot.provider);
  return provider.page_format == PageFormat::kInstatus
             ? parse_instatus_history(snapshot, registry)
             : parse_statuspage_history(snapshot, registry);
}

}  // namespace fails
