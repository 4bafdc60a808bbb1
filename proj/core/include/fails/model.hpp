#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fails/time.hpp"

namespace fails {

class Registry;

// Ordered so that comparisons follow severity; Maintenance sorts lowest.
enum class ImpactLevel { kMaintenance = 0, kNone = 1, kMinor = 2, kMajor = 3, kCritical = 4 };

std::string_view impact_level_name(ImpactLevel level);
std::optional<ImpactLevel> impact_level_from_name(std::string_view name);

struct Impact {
  ImpactLevel level = ImpactLevel::kNone;
  int severity = 2;  // 1..5

  auto operator<=>(const Impact&) const = default;
};

enum class RecoveryStage {
  kInvestigating = 0,  // S1
  kIdentified = 1,     // S2
  kMonitoring = 2,     // S3
  kResolved = 3,       // S4
  kPostmortem = 4,     // S5
};

inline constexpr std::size_t kStageCount = 5;
inline constexpr std::array<RecoveryStage, kStageCount> kAllStages = {
    RecoveryStage::kInvestigating, RecoveryStage::kIdentified,
    RecoveryStage::kMonitoring, RecoveryStage::kResolved,
    RecoveryStage::kPostmortem};

/// "S1" .. "S5"
std::string_view stage_label(RecoveryStage stage);
/// "investigating" .. "postmortem"
std::string_view stage_name(RecoveryStage stage);
std::optional<RecoveryStage> stage_from_name(std::string_view name);

struct IncidentUpdate {
  RecoveryStage stage = RecoveryStage::kInvestigating;
  Timestamp at;
  std::string body;

  bool operator==(const IncidentUpdate&) const = default;
};

using StageTimes = std::array<std::optional<Timestamp>, kStageCount>;

struct IncidentRecord {
  std::string incident_id;
  std::string provider;
  std::set<std::string> services;
  std::string title;
  Impact impact;
  std::string impact_color;
  Timestamp start;
  std::optional<Timestamp> end;
  StageTimes stage_times{};
  std::vector<IncidentUpdate> updates;
  std::optional<std::string> source_url;

  const std::optional<Timestamp>& stage_time(RecoveryStage s) const {
    return stage_times[static_cast<std::size_t>(s)];
  }
  std::optional<Timestamp>& stage_time(RecoveryStage s) {
    return stage_times[static_cast<std::size_t>(s)];
  }

  bool operator==(const IncidentRecord&) const = default;
};

struct IncidentDataset {
  std::vector<IncidentRecord> records;
  Timestamp scraped_at;
  std::map<std::string, std::string> provenance;
  // Records observed by an older scrape than `scraped_at` (after merges).
  // Absent ids were observed at `scraped_at`.
  std::map<std::string, Timestamp> observed_at;

  Timestamp observed(const std::string& incident_id) const;
  /// Restores the (start, incident_id) ordering.
  void sort_records();
  bool operator==(const IncidentDataset&) const = default;
};

struct AnalysisSelection {
  Timestamp from;
  Timestamp to;
  std::set<std::string> services;

  bool operator==(const AnalysisSelection&) const = default;
};

/// Throws Error(kPrecondition) unless from < to and services is non-empty.
void check_selection(const AnalysisSelection& sel);

/// Window covering every record and scraped_at, whole UTC days, all services.
AnalysisSelection full_selection(const IncidentDataset& dataset,
                                 const Registry& registry);

enum class IssueSeverity { kWarning, kError };

struct ValidationIssue {
  std::string code;  // END_BEFORE_START, STAGE_ORDER, ...
  IssueSeverity severity = IssueSeverity::kError;
  std::string message;
};

std::vector<ValidationIssue> validate_incident(const IncidentRecord& record,
                                               const Registry& registry);
bool has_errors(const std::vector<ValidationIssue>& issues);

IncidentDataset filter_selection(const IncidentDataset& dataset,
                                 const AnalysisSelection& sel);

}  // namespace fails
