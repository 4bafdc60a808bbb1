#include "fails/store.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "fails/error.hpp"
#include "text_util.hpp"

namespace fails {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kColumnCount = kDatasetColumns.size();

void append_field(std::string& out, std::string_view field) {
  const bool quote = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!quote) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

std::string opt_ts(const std::optional<Timestamp>& t) { return t ? t->iso() : std::string(); }

std::string updates_json(const std::vector<IncidentUpdate>& updates) {
  json arr = json::array();
  for (const auto& u : updates) {
    arr.push_back({{"stage", stage_name(u.stage)}, {"at", u.at.iso()}, {"body", u.body}});
  }
  return arr.dump(-1, ' ', false, json::error_handler_t::replace);
}

// RFC 4180 reader with `\n` (or `\r\n`) record separators.
std::vector<std::vector<std::string>> read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kRowInvalid,
                "row " + std::to_string(rows.size()) + ": unterminated quoted field");
  }
  if (field_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] void row_invalid(std::size_t row, const std::string& why) {
  throw Error(ErrorCode::kRowInvalid, "row " + std::to_string(row) + ": " + why);
}

Timestamp require_ts(std::size_t row, std::string_view column, const std::string& text) {
  auto t = Timestamp::parse_iso(text);
  if (!t) row_invalid(row, std::string(column) + " is not an ISO-8601 UTC timestamp: '" + text + "'");
  return *t;
}

std::optional<Timestamp> optional_ts(std::size_t row, std::string_view column,
                                     const std::string& text) {
  if (text.empty()) return std::nullopt;
  return require_ts(row, column, text);
}

IncidentRecord parse_row(std::size_t row, const std::vector<std::string>& f) {
  IncidentRecord r;
  r.incident_id = f[0];
  r.provider = f[1];
  if (!f[2].empty()) {
    for (auto& s : split(f[2], '|')) r.services.insert(std::move(s));
  }
  r.title = f[3];
  const auto level = impact_level_from_name(f[4]);
  if (!level) row_invalid(row, "unknown impact_level '" + f[4] + "'");
  r.impact.level = *level;
  r.impact_color = f[5];
  try {
    std::size_t used = 0;
    r.impact.severity = std::stoi(f[6], &used);
    if (used != f[6].size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    row_invalid(row, "severity_score is not an integer: '" + f[6] + "'");
  }
  r.start = require_ts(row, "start_ts", f[7]);
  r.end = optional_ts(row, "end_ts", f[8]);
  for (std::size_t s = 0; s < kStageCount; ++s) {
    r.stage_times[s] = optional_ts(row, kDatasetColumns[9 + s], f[9 + s]);
  }
  if (!f[14].empty()) r.source_url = f[14];
  try {
    const json arr = json::parse(f[15].empty() ? std::string("[]") : f[15]);
    if (!arr.is_array()) row_invalid(row, "raw_updates_json is not an array");
    for (const auto& u : arr) {
      const auto stage = stage_from_name(u.at("stage").get<std::string>());
      if (!stage) row_invalid(row, "unknown update stage");
      r.updates.push_back(IncidentUpdate{
          *stage, require_ts(row, "raw_updates_json.at", u.at("at").get<std::string>()),
          u.value("body", "")});
    }
  } catch (const json::exception& e) {
    row_invalid(row, std::string("raw_updates_json: ") + e.what());
  }
  return r;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed for " + path.string());
  return ss.str();
}

void write_file_atomically(const fs::path& path, const std::string& bytes,
                           const WriteOptions& options, bool keep_backup) {
  const fs::path tmp = temp_path(path);
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIoError, "cannot create " + tmp.string());
      const std::size_t half = bytes.size() / 2;
      out.write(bytes.data(), static_cast<std::streamsize>(half));
      if (options.fault_hook) options.fault_hook("temp-partial");
      out.write(bytes.data() + half, static_cast<std::streamsize>(bytes.size() - half));
      out.flush();
      if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
    }
    if (keep_backup && fs::exists(path)) {
      fs::copy_file(path, backup_path(path), fs::copy_options::overwrite_existing);
    }
    if (options.fault_hook) options.fault_hook("before-rename");
    fs::rename(tmp, path);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

}  // namespace

std::string serialize_records(const IncidentDataset& dataset) {
  std::string out;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i != 0) out += ',';
    out += kDatasetColumns[i];
  }
  out += '\n';
  for (const auto& r : dataset.records) {
    const std::vector<std::string> services(r.services.begin(), r.services.end());
    const std::string fields[kColumnCount] = {
        r.incident_id,
        r.provider,
        join(services, "|"),
        r.title,
        std::string(impact_level_name(r.impact.level)),
        r.impact_color,
        std::to_string(r.impact.severity),
        r.start.iso(),
        opt_ts(r.end),
        opt_ts(r.stage_times[0]),
        opt_ts(r.stage_times[1]),
        opt_ts(r.stage_times[2]),
        opt_ts(r.stage_times[3]),
        opt_ts(r.stage_times[4]),
        r.source_url.value_or(""),
        updates_json(r.updates),
    };
    for (std::size_t i = 0; i < kColumnCount; ++i) {
      if (i != 0) out += ',';
      append_field(out, fields[i]);
    }
    out += '\n';
  }
  return out;
}

IncidentDataset parse_records(std::string_view csv, const Registry& registry) {
  const auto rows = read_csv(csv);
  if (rows.empty()) throw Error(ErrorCode::kSchemaMismatch, "missing header row");
  const auto& header = rows.front();
  bool header_ok = header.size() == kColumnCount;
  for (std::size_t i = 0; header_ok && i < kColumnCount; ++i) {
    header_ok = header[i] == kDatasetColumns[i];
  }
  if (!header_ok) {
    throw Error(ErrorCode::kSchemaMismatch,
                "header does not match the dataset schema: '" + join(header, ",") + "'");
  }

  IncidentDataset dataset;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t row = i;
    if (rows[i].size() != kColumnCount) {
      row_invalid(row, "expected " + std::to_string(kColumnCount) + " fields, got " +
                           std::to_string(rows[i].size()));
    }
    IncidentRecord r = parse_row(row, rows[i]);
    for (const auto& issue : validate_incident(r, registry)) {
      if (issue.severity == IssueSeverity::kError) {
        row_invalid(row, issue.code + " " + issue.message);
      }
    }
    if (auto [it, fresh] = seen.emplace(r.incident_id, row); !fresh) {
      row_invalid(row, "duplicate incident_id '" + r.incident_id + "' (first at row " +
                           std::to_string(it->second) + ")");
    }
    dataset.records.push_back(std::move(r));
  }
  dataset.sort_records();
  Timestamp latest;
  for (const auto& r : dataset.records) {
    latest = std::max(latest, r.start);
    if (r.end) latest = std::max(latest, *r.end);
  }
  dataset.scraped_at = latest;
  return dataset;
}

std::string serialize_metadata(const IncidentDataset& dataset) {
  json doc;
  doc["scraped_at"] = dataset.scraped_at.iso();
  doc["provenance"] = dataset.provenance;
  json observed = json::object();
  for (const auto& [id, t] : dataset.observed_at) observed[id] = t.iso();
  doc["observed_at"] = observed;
  return doc.dump(2) + "\n";
}

void apply_metadata(IncidentDataset& dataset, std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    const auto scraped = Timestamp::parse_iso(doc.at("scraped_at").get<std::string>());
    if (!scraped) throw Error(ErrorCode::kSchemaMismatch, "metadata scraped_at is not ISO-8601");
    dataset.scraped_at = *scraped;
    dataset.provenance = doc.value("provenance", std::map<std::string, std::string>{});
    dataset.observed_at.clear();
    if (auto it = doc.find("observed_at"); it != doc.end()) {
      for (const auto& [id, t] : it->items()) {
        const auto ts = Timestamp::parse_iso(t.get<std::string>());
        if (!ts) throw Error(ErrorCode::kSchemaMismatch, "metadata observed_at is not ISO-8601");
        dataset.observed_at[id] = *ts;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("malformed metadata: ") + e.what());
  }
}

fs::path metadata_path(const fs::path& path) { return fs::path(path.string() + ".meta.json"); }
fs::path backup_path(const fs::path& path) { return fs::path(path.string() + ".bak"); }
fs::path temp_path(const fs::path& path) { return fs::path(path.string() + ".tmp"); }

void write_dataset(const IncidentDataset& dataset, const fs::path& path,
                   const WriteOptions& options) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  write_file_atomically(path, serialize_records(dataset), options, true);
  write_file_atomically(metadata_path(path), serialize_metadata(dataset), {}, false);
}

IncidentDataset read_dataset(const fs::path& path, const Registry& registry) {
  IncidentDataset dataset = parse_records(read_file(path), registry);
  const fs::path meta = metadata_path(path);
  if (fs::exists(meta)) apply_metadata(dataset, read_file(meta));
  return dataset;
}

MergeResult merge_datasets(const IncidentDataset& base, const IncidentDataset& incoming) {
  MergeResult out;
  IncidentDataset& merged = out.dataset;
  merged.scraped_at = std::max(base.scraped_at, incoming.scraped_at);
  merged.provenance = base.provenance;
  for (const auto& [provider, source] : incoming.provenance) {
    if (incoming.scraped_at >= base.scraped_at || merged.provenance.count(provider) == 0) {
      merged.provenance[provider] = source;
    }
  }

  struct Entry {
    const IncidentRecord* record;
    Timestamp observed;
  };
  std::map<std::string, Entry> by_id;
  for (const auto& r : base.records) by_id[r.incident_id] = {&r, base.observed(r.incident_id)};

  for (const auto& r : incoming.records) {
    const Timestamp observed = incoming.observed(r.incident_id);
    auto it = by_id.find(r.incident_id);
    if (it == by_id.end()) {
      by_id[r.incident_id] = {&r, observed};
      ++out.report.added;
    } else if (*it->second.record == r) {
      it->second.observed = std::max(it->second.observed, observed);
      ++out.report.unchanged;
    } else if (observed >= it->second.observed) {
      it->second = {&r, observed};
      ++out.report.replaced;
      out.report.conflicts.push_back(r.incident_id);
    } else {
      ++out.report.unchanged;
      out.report.conflicts.push_back(r.incident_id);
    }
  }

  merged.records.reserve(by_id.size());
  for (const auto& [id, entry] : by_id) {
    merged.records.push_back(*entry.record);
    if (entry.observed != merged.scraped_at) merged.observed_at[id] = entry.observed;
  }
  merged.sort_records();
  return out;
}

}  // namespace fails
