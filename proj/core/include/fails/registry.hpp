#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fails/model.hpp"

namespace fails {

enum class PageFormat { kStatuspage, kInstatus };

std::string_view page_format_name(PageFormat format);

struct Provider {
  std::string id;
  std::string display_name;
  PageFormat page_format = PageFormat::kStatuspage;
  std::string base_url;
  // Zone used for timestamps printed without an offset.
  std::string assumed_zone = "UTC";
};

struct Service {
  std::string id;
  std::string provider;
  std::string display_name;
  // Alternative component names accepted as explicit tags.
  std::vector<std::string> tag_aliases;
  // Lowercase phrases matched on word boundaries in free text.
  std::vector<std::string> match_keywords;
};

struct ImpactEntry {
  Impact impact;
  std::string color;
};

/// Providers, services and per-provider impact vocabularies.
///
/// Insertion order is preserved and is the canonical display order used by
/// plots and summaries.
class Registry {
 public:
  /// Parses the registry/keyword config document, optionally with an impact
  /// vocabulary document. Throws Error(kPrecondition) on malformed config.
  static Registry from_config(std::string_view services_json,
                              std::string_view impact_json);

  void add_provider(Provider provider);
  void add_service(Service service);
  void set_impact_table(const std::string& provider_id,
                        std::map<std::string, ImpactEntry> table);

  const std::vector<Provider>& providers() const { return providers_; }
  const std::vector<Service>& services() const { return services_; }

  const Provider* find_provider(std::string_view id) const;
  const Service* find_service(std::string_view id) const;
  const Provider& provider(std::string_view id) const;  // throws kUnknownProvider

  std::vector<const Service*> services_of(std::string_view provider_id) const;
  std::vector<std::string> service_ids_of(std::string_view provider_id) const;
  std::set<std::string> all_service_ids() const;

  /// Returns `ids` in registry order; unknown ids are appended sorted.
  std::vector<std::string> ordered(const std::set<std::string>& ids) const;
  std::size_t service_index(std::string_view id) const;

  /// Translates a provider-native impact label. Unknown labels yield nullopt.
  std::optional<ImpactEntry> translate_impact(std::string_view provider_id,
                                              std::string_view label) const;
  /// Default color/severity for a canonical level under a provider's table.
  ImpactEntry canonical_impact(std::string_view provider_id,
                               ImpactLevel level) const;

 private:
  std::vector<Provider> providers_;
  std::vector<Service> services_;
  std::map<std::string, std::map<std::string, ImpactEntry>> impact_tables_;
};

/// The four built-in providers and eleven services.
const Registry& builtin_registry();

}  // namespace fails
