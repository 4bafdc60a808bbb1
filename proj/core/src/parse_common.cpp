#include "parse_common.hpp"

#include <algorithm>

#include "fails/error.hpp"
#include "text_util.hpp"

namespace fails {

std::optional<RecoveryStage> stage_from_status(std::string_view status) {
  const std::string key = impact_key(status);
  if (key == "investigating" || key == "scheduled" || key == "inprogress" ||
      key == "notstartedyet") {
    return RecoveryStage::kInvestigating;
  }
  if (key == "identified") return RecoveryStage::kIdentified;
  if (key == "monitoring" || key == "verifying") return RecoveryStage::kMonitoring;
  if (key == "resolved" || key == "completed") return RecoveryStage::kResolved;
  if (key == "postmortem") return RecoveryStage::kPostmortem;
  return std::nullopt;
}

namespace detail {

void apply_updates(IncidentRecord& record, std::vector<SourceUpdate> updates,
                   std::vector<std::string>& warnings) {
  std::stable_sort(updates.begin(), updates.end(),
                   [](const SourceUpdate& a, const SourceUpdate& b) {
                     return a.at < b.at;
                   });
  record.updates.clear();
  record.stage_times = {};
  RecoveryStage current = RecoveryStage::kInvestigating;
  for (auto& u : updates) {
    if (auto stage = stage_from_status(u.status)) {
      current = *stage;
    } else if (impact_key(u.status) != "update") {
      warnings.push_back(record.incident_id + ": unknown update status '" +
                         u.status + "' treated as a plain update");
    }
    auto& slot = record.stage_time(current);
    if (!slot || u.at < *slot) slot = u.at;
    record.updates.push_back(IncidentUpdate{current, u.at, std::move(u.body)});
  }
}

void apply_impact(IncidentRecord& record, const Registry& registry,
                  const std::string& label, std::vector<std::string>& warnings) {
  if (auto entry = registry.translate_impact(record.provider, label)) {
    record.impact = entry->impact;
    if (record.impact_color.empty()) record.impact_color = entry->color;
    return;
  }
  warnings.push_back(record.incident_id + ": unknown impact label '" + label +
                     "', using none");
  const ImpactEntry fallback =
      registry.canonical_impact(record.provider, ImpactLevel::kNone);
  record.impact = fallback.impact;
  if (record.impact_color.empty()) record.impact_color = fallback.color;
}

void apply_services(IncidentRecord& record, const Registry& registry,
                    const std::vector<std::string>& tags,
                    std::vector<std::string>& warnings) {
  std::string description = record.title;
  for (const auto& u : record.updates) {
    description += '\n';
    description += u.body;
  }
  ServiceMatch match =
      identify_services(record.provider, tags, description, registry);
  if (match.provider_wide) {
    warnings.push_back(record.incident_id +
                       ": no service identified, assuming provider-wide scope");
  }
  record.services = std::move(match.services);
}

void malformed(const PageSnapshot& snapshot, const std::string& what) {
  throw Error(ErrorCode::kMalformedPage,
              snapshot.url + ": page structure not recognized, missing " + what);
}

std::string origin_of(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) return {};
  const auto slash = url.find('/', scheme + 3);
  return slash == std::string::npos ? url : url.substr(0, slash);
}

}  // namespace detail

ServiceMatch identify_services(const std::string& provider_id,
                               const std::vector<std::string>& explicit_tags,
                               std::string_view description,
                               const Registry& registry) {
  registry.provider(provider_id);  // throws for unknown providers
  ServiceMatch match;
  const auto services = registry.services_of(provider_id);
  for (const auto& raw_tag : explicit_tags) {
    const std::string tag = ascii_lower(trim(raw_tag));
    for (const Service* s : services) {
      bool hit = ascii_lower(s->display_name) == tag;
      for (const auto& alias : s->tag_aliases) hit = hit || ascii_lower(alias) == tag;
      if (hit) match.services.insert(s->id);
    }
  }
  const std::string text = ascii_lower(description);
  for (const Service* s : services) {
    for (const auto& kw : s->match_keywords) {
      if (contains_on_word_boundary(text, kw)) {
        match.services.insert(s->id);
        break;
      }
    }
  }
  if (match.services.empty()) {
    match.provider_wide = true;
    for (const Service* s : services) match.services.insert(s->id);
  }
  return match;
}

}  // namespace fails
