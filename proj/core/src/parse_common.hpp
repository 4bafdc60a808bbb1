#pragma once

#include <string>
#include <vector>

#include "fails/ingest.hpp"
#include "fails/model.hpp"
#include "fails/registry.hpp"

namespace fails::detail {

struct SourceUpdate {
  std::string status;
  Timestamp at;
  std::string body;
};

/// Orders updates oldest first, resolves their stages and fills
/// record.updates and record.stage_times (earliest time per stage).
/// Updates without a stage of their own inherit the preceding stage.
void apply_updates(IncidentRecord& record, std::vector<SourceUpdate> updates,
                   std::vector<std::string>& warnings);

/// Translates a provider impact label, falling back to None with a warning.
void apply_impact(IncidentRecord& record, const Registry& registry,
                  const std::string& label, std::vector<std::string>& warnings);

/// Fills services from explicit tags and free text (title + bodies).
void apply_services(IncidentRecord& record, const Registry& registry,
                    const std::vector<std::string>& tags,
                    std::vector<std::string>& warnings);

[[noreturn]] void malformed(const PageSnapshot& snapshot, const std::string& what);

std::string origin_of(const std::string& url);

}  // namespace fails::detail
