#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fails/model.hpp"
#include "fails/registry.hpp"

namespace fails {

inline constexpr std::array<std::string_view, 16> kDatasetColumns = {
    "incident_id",      "provider",      "services",     "title",
    "impact_level",     "impact_color",  "severity_score", "start_ts",
    "end_ts",           "investigating_ts", "identified_ts", "monitoring_ts",
    "resolved_ts",      "postmortem_ts", "source_url",   "raw_updates_json"};

/// CSV text of the records (header + one row per incident).
std::string serialize_records(const IncidentDataset& dataset);
/// Parses CSV text produced by serialize_records. Throws kSchemaMismatch /
/// kRowInvalid (message names the 1-based data row).
IncidentDataset parse_records(std::string_view csv,
                              const Registry& registry = builtin_registry());

/// JSON sidecar carrying scraped_at, provenance and observed_at.
std::string serialize_metadata(const IncidentDataset& dataset);
void apply_metadata(IncidentDataset& dataset, std::string_view json_text);

std::filesystem::path metadata_path(const std::filesystem::path& path);
std::filesystem::path backup_path(const std::filesystem::path& path);
std::filesystem::path temp_path(const std::filesystem::path& path);

struct WriteOptions {
  // Called at named points of the write protocol ("temp-partial",
  // "before-rename"); throwing from it simulates a crash at that point.
  std::function<void(std::string_view)> fault_hook;
};

/// Atomic write: previous file copied to `<path>.bak`, new content written
/// to `<path>.tmp` and renamed over `path`. Throws kIoError.
void write_dataset(const IncidentDataset& dataset, const std::filesystem::path& path,
                   const WriteOptions& options = {});

/// Throws kIoError, kSchemaMismatch, kRowInvalid. Without a metadata
/// sidecar, scraped_at is the latest timestamp found in the records.
IncidentDataset read_dataset(const std::filesystem::path& path,
                             const Registry& registry = builtin_registry());

struct MergeReport {
  std::size_t added = 0;
  std::size_t replaced = 0;
  std::size_t unchanged = 0;
  std::vector<std::string> conflicts;  // ids whose versions differed
};

struct MergeResult {
  IncidentDataset dataset;
  MergeReport report;
};

/// Union by incident_id; on collision the copy observed by the later scrape
/// wins (ties favour `incoming`).
MergeResult merge_datasets(const IncidentDataset& base, const IncidentDataset& incoming);

}  // namespace fails
