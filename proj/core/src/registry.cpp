#include "fails/registry.hpp"

#include <json.hpp>

#include <algorithm>

#include "embedded_config.hpp"
#include "fails/error.hpp"
#include "text_util.hpp"

namespace fails {

using nlohmann::json;

std::string_view page_format_name(PageFormat format) {
  return format == PageFormat::kInstatus ? "instatus" : "statuspage";
}

Registry Registry::from_config(std::string_view services_json,
                               std::string_view impact_json) {
  Registry reg;
  try {
    const json doc = json::parse(services_json);
    for (const auto& p : doc.at("providers")) {
      Provider provider;
      provider.id = p.at("id").get<std::string>();
      provider.display_name = p.at("display_name").get<std::string>();
      const auto format = p.at("page_format").get<std::string>();
      if (format == "statuspage") {
        provider.page_format = PageFormat::kStatuspage;
      } else if (format == "instatus") {
        provider.page_format = PageFormat::kInstatus;
      } else {
        throw Error(ErrorCode::kPrecondition,
                    "unknown page_format '" + format + "' for " + provider.id);
      }
      provider.base_url = p.value("base_url", "");
      provider.assumed_zone = p.value("assumed_zone", "UTC");
      reg.add_provider(provider);
      for (const auto& s : p.at("services")) {
        Service service;
        service.id = s.at("id").get<std::string>();
        service.provider = provider.id;
        service.display_name = s.at("display_name").get<std::string>();
        service.tag_aliases = s.value("aliases", std::vector<std::string>{});
        for (const auto& kw : s.value("keywords", std::vector<std::string>{})) {
          service.match_keywords.push_back(ascii_lower(kw));
        }
        reg.add_service(std::move(service));
      }
    }

    if (!impact_json.empty()) {
      const json impact = json::parse(impact_json);
      std::map<std::string, std::map<std::string, ImpactEntry>> families;
      for (const auto& [family, entries] : impact.at("families").items()) {
        auto& table = families[family];
        for (const auto& [label, e] : entries.items()) {
          const auto level_name = e.at("level").get<std::string>();
          const auto level = impact_level_from_name(level_name);
          if (!level) {
            throw Error(ErrorCode::kPrecondition,
                        "unknown impact level '" + level_name + "'");
          }
          const int severity = e.at("severity").get<int>();
          if (severity < 1 || severity > 5) {
            throw Error(ErrorCode::kPrecondition,
                        "severity out of range for '" + label + "'");
          }
          table[impact_key(label)] =
              ImpactEntry{Impact{*level, severity}, e.value("color", "")};
        }
      }
      for (const auto& [provider_id, family] : impact.at("providers").items()) {
        auto it = families.find(family.get<std::string>());
        if (it == families.end()) {
          throw Error(ErrorCode::kPrecondition,
                      "provider " + provider_id + " references unknown family");
        }
        reg.set_impact_table(provider_id, it->second);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kPrecondition,
                std::string("malformed registry config: ") + e.what());
  }
  return reg;
}

void Registry::add_provider(Provider provider) {
  if (find_provider(provider.id) != nullptr) {
    throw Error(ErrorCode::kPrecondition,
                "duplicate provider id '" + provider.id + "'");
  }
  providers_.push_back(std::move(provider));
}

void Registry::add_service(Service service) {
  if (find_provider(service.provider) == nullptr) {
    throw Error(ErrorCode::kUnknownProvider,
                "service " + service.id + " names unknown provider " +
                    service.provider);
  }
  if (find_service(service.id) != nullptr) {
    throw Error(ErrorCode::kPrecondition,
                "duplicate service id '" + service.id + "'");
  }
  services_.push_back(std::move(service));
}

void Registry::set_impact_table(const std::string& provider_id,
                                std::map<std::string, ImpactEntry> table) {
  std::map<std::string, ImpactEntry> normalized;
  for (auto& [label, entry] : table) normalized[impact_key(label)] = entry;
  impact_tables_[provider_id] = std::move(normalized);
}

const Provider* Registry::find_provider(std::string_view id) const {
  auto it = std::find_if(providers_.begin(), providers_.end(),
                         [&](const Provider& p) { return p.id == id; });
  return it == providers_.end() ? nullptr : &*it;
}

const Service* Registry::find_service(std::string_view id) const {
  auto it = std::find_if(services_.begin(), services_.end(),
                         [&](const Service& s) { return s.id == id; });
  return it == services_.end() ? nullptr : &*it;
}

const Provider& Registry::provider(std::string_view id) const {
  const Provider* p = find_provider(id);
  if (p == nullptr) {
    throw Error(ErrorCode::kUnknownProvider,
                "unknown provider '" + std::string(id) + "'");
  }
  return *p;
}

std::vector<const Service*> Registry::services_of(
    std::string_view provider_id) const {
  std::vector<const Service*> out;
  for (const auto& s : services_) {
    if (s.provider == provider_id) out.push_back(&s);
  }
  return out;
}

std::vector<std::string> Registry::service_ids_of(
    std::string_view provider_id) const {
  std::vector<std::string> out;
  for (const auto* s : services_of(provider_id)) out.push_back(s->id);
  return out;
}

std::set<std::string> Registry::all_service_ids() const {
  std::set<std::string> out;
  for (const auto& s : services_) out.insert(s.id);
  return out;
}

std::size_t Registry::service_index(std::string_view id) const {
  for (std::size_t i = 0; i < services_.size(); ++i) {
    if (services_[i].id == id) return i;
  }
  return services_.size();
}

std::vector<std::string> Registry::ordered(
    const std::set<std::string>& ids) const {
  std::vector<std::string> out;
  for (const auto& s : services_) {
    if (ids.count(s.id) != 0) out.push_back(s.id);
  }
  for (const auto& id : ids) {
    if (find_service(id) == nullptr) out.push_back(id);
  }
  return out;
}

std::optional<ImpactEntry> Registry::translate_impact(
    std::string_view provider_id, std::string_view label) const {
  auto table = impact_tables_.find(std::string(provider_id));
  if (table == impact_tables_.end()) return std::nullopt;
  auto it = table->second.find(impact_key(label));
  if (it == table->second.end()) return std::nullopt;
  return it->second;
}

ImpactEntry Registry::canonical_impact(std::string_view provider_id,
                                       ImpactLevel level) const {
  auto table = impact_tables_.find(std::string(provider_id));
  if (table != impact_tables_.end()) {
    for (const auto& [label, entry] : table->second) {
      if (entry.impact.level == level) return entry;
    }
  }
  // Fallback used for providers registered without a vocabulary.
  static constexpr int kSeverity[] = {1, 2, 3, 4, 5};
  return ImpactEntry{Impact{level, kSeverity[static_cast<int>(level)]}, ""};
}

const Registry& builtin_registry() {
  static const Registry registry =
      Registry::from_config(config::kServicesJson, config::kImpactMapJson);
  return registry;
}

}  // namespace fails
