#include "fails/model.hpp"

#include <algorithm>

#include "fails/error.hpp"
#include "fails/registry.hpp"

namespace fails {

std::string_view error_code_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPrecondition: return "PRECONDITION";
    case ErrorCode::kUnknownProvider: return "UNKNOWN_PROVIDER";
    case ErrorCode::kUnknownService: return "UNKNOWN_SERVICE";
    case ErrorCode::kUnknownGroup: return "UNKNOWN_GROUP";
    case ErrorCode::kNetworkExhausted: return "NETWORK_EXHAUSTED";
    case ErrorCode::kMalformedPage: return "MALFORMED_PAGE";
    case ErrorCode::kEmptyHistory: return "EMPTY_HISTORY";
    case ErrorCode::kUnparseableTimestamp: return "UNPARSEABLE_TIMESTAMP";
    case ErrorCode::kIoError: return "IO_ERROR";
    case ErrorCode::kSchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::kRowInvalid: return "ROW_INVALID";
    case ErrorCode::kEmptySamples: return "EMPTY_SAMPLES";
    case ErrorCode::kDegenerateSeries: return "DEGENERATE_SERIES";
    case ErrorCode::kInsufficientData: return "INSUFFICIENT_DATA";
    case ErrorCode::kRenderFailure: return "RENDER_FAILURE";
    case ErrorCode::kClientError: return "LLM_UPSTREAM";
    case ErrorCode::kClientAuth: return "LLM_AUTH";
    case ErrorCode::kEmptyResponse: return "LLM_EMPTY_RESPONSE";
  }
  return "INTERNAL";
}

std::string_view impact_level_name(ImpactLevel level) {
  switch (level) {
    case ImpactLevel::kMaintenance: return "maintenance";
    case ImpactLevel::kNone: return "none";
    case ImpactLevel::kMinor: return "minor";
    case ImpactLevel::kMajor: return "major";
    case ImpactLevel::kCritical: return "critical";
  }
  return "none";
}

std::optional<ImpactLevel> impact_level_from_name(std::string_view name) {
  for (auto level : {ImpactLevel::kMaintenance, ImpactLevel::kNone,
                     ImpactLevel::kMinor, ImpactLevel::kMajor,
                     ImpactLevel::kCritical}) {
    if (impact_level_name(level) == name) return level;
  }
  return std::nullopt;
}

std::string_view stage_label(RecoveryStage stage) {
  static constexpr std::string_view kLabels[] = {"S1", "S2", "S3", "S4", "S5"};
  return kLabels[static_cast<std::size_t>(stage)];
}

std::string_view stage_name(RecoveryStage stage) {
  static constexpr std::string_view kNames[] = {
      "investigating", "identified", "monitoring", "resolved", "postmortem"};
  return kNames[static_cast<std::size_t>(stage)];
}

std::optional<RecoveryStage> stage_from_name(std::string_view name) {
  for (auto s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

Timestamp IncidentDataset::observed(const std::string& incident_id) const {
  auto it = observed_at.find(incident_id);
  return it == observed_at.end() ? scraped_at : it->second;
}

void IncidentDataset::sort_records() {
  std::stable_sort(records.begin(), records.end(),
                   [](const IncidentRecord& a, const IncidentRecord& b) {
                     if (a.start != b.start) return a.start < b.start;
                     return a.incident_id < b.incident_id;
                   });
}

void check_selection(const AnalysisSelection& sel) {
  if (!(sel.from < sel.to)) {
    throw Error(ErrorCode::kPrecondition,
                "selection requires from < to (got " + sel.from.iso() + " .. " +
                    sel.to.iso() + ")");
  }
  if (sel.services.empty()) {
    throw Error(ErrorCode::kPrecondition, "selection names no services");
  }
}

AnalysisSelection full_selection(const IncidentDataset& dataset,
                                 const Registry& registry) {
  AnalysisSelection sel;
  sel.services = registry.all_service_ids();
  if (dataset.records.empty()) {
    sel.from = dataset.scraped_at.floor_day();
    sel.to = sel.from + kDay;
    return sel;
  }
  Timestamp first = dataset.records.front().start;
  Timestamp last = dataset.scraped_at;
  for (const auto& r : dataset.records) {
    first = std::min(first, r.start);
    last = std::max(last, r.start);
    if (r.end) last = std::max(last, *r.end);
  }
  sel.from = first.floor_day();
  sel.to = last.floor_day() + kDay;
  return sel;
}

std::vector<ValidationIssue> validate_incident(const IncidentRecord& record,
                                               const Registry& registry) {
  std::vector<ValidationIssue> issues;
  auto error = [&](std::string code, std::string message) {
    issues.push_back({std::move(code), IssueSeverity::kError, std::move(message)});
  };
  auto warning = [&](std::string code, std::string message) {
    issues.push_back({std::move(code), IssueSeverity::kWarning, std::move(message)});
  };

  if (record.incident_id.empty()) error("EMPTY_ID", "incident_id is empty");
  if (registry.find_provider(record.provider) == nullptr) {
    error("UNKNOWN_PROVIDER", "unknown provider '" + record.provider + "'");
  }
  if (record.services.empty()) error("EMPTY_SERVICES", "no affected services");
  for (const auto& id : record.services) {
    const Service* s = registry.find_service(id);
    if (s == nullptr) {
      error("UNKNOWN_SERVICE", "unknown service '" + id + "'");
    } else if (s->provider != record.provider) {
      error("SERVICE_PROVIDER_MISMATCH",
            "service '" + id + "' does not belong to " + record.provider);
    }
  }
  if (record.impact.severity < 1 || record.impact.severity > 5) {
    error("SEVERITY_RANGE", "severity score outside 1..5");
  }
  if (record.end && *record.end < record.start) {
    error("END_BEFORE_START", "end " + record.end->iso() + " precedes start " +
                                  record.start.iso());
  }
  if (!record.end) warning("MISSING_END", "incident has no end time");

  std::optional<Timestamp> prev;
  RecoveryStage prev_stage = RecoveryStage::kInvestigating;
  for (auto s : kAllStages) {
    const auto& t = record.stage_time(s);
    if (!t) continue;
    if (prev && *t < *prev) {
      warning("STAGE_ORDER", std::string(stage_label(s)) + " precedes " +
                                 std::string(stage_label(prev_stage)));
    }
    prev = t;
    prev_stage = s;
  }
  return issues;
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
  return std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
    return i.severity == IssueSeverity::kError;
  });
}

IncidentDataset filter_selection(const IncidentDataset& dataset,
                                 const AnalysisSelection& sel) {
  IncidentDataset out;
  out.scraped_at = dataset.scraped_at;
  out.provenance = dataset.provenance;
  for (const auto& r : dataset.records) {
    if (r.start < sel.from || sel.to < r.start) continue;
    const bool hit = std::any_of(r.services.begin(), r.services.end(),
                                 [&](const std::string& s) {
                                   return sel.services.count(s) != 0;
                                 });
    if (hit) out.records.push_back(r);
  }
  return out;
}

}  // namespace fails
