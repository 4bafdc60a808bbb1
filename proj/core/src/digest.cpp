#include <algorithm>

#include <fmt/format.h>

#include "fails/error.hpp"
#include "fails/llm.hpp"
#include "text_util.hpp"

namespace fails {

namespace {

std::string summary_text(const DatasetDigest& d) {
  std::string out = "Dataset digest\n";
  out += fmt::format("Total incidents: {}\n", d.total_incidents);
  if (d.first_date && d.last_date) {
    out += fmt::format("Date range: {} to {}\n", *d.first_date, *d.last_date);
  }
  out += "Reports per provider:\n";
  for (const auto& p : d.providers) {
    out += fmt::format("- {}: {} reports ({} maintenance), first {}, last {}\n", p.provider,
                       p.reports, p.maintenance, p.first_date, p.last_date);
  }
  out += "Incidents per service:\n";
  for (const auto& [service, n] : d.service_counts) out += fmt::format("- {}: {}\n", service, n);
  out += "Impact severity per provider (1 maintenance .. 5 critical):\n";
  for (const auto& imp : d.impact) {
    std::string bins;
    for (const auto& b : imp.bins.bins) bins += fmt::format(" {}={}", b.label, format_measure(b.value));
    out += fmt::format("- {}:{} mean={} median={} count={}\n", imp.provider, bins,
                       format_measure(imp.mean), format_measure(imp.median), imp.count);
  }
  out += "Longest resolved incidents:\n";
  for (const auto& l : d.longest) {
    out += fmt::format("- {} ({}, {} h): {}\n", l.incident_id, l.provider,
                       format_measure(static_cast<double>(l.duration) / 3600.0), l.title);
  }
  return out;
}

std::string index_header(std::size_t shown, std::size_t total) {
  return fmt::format("Incident index ({} of {} rows, oldest dropped first):\n", shown, total);
}

std::string index_row(const DigestIndexRow& row) {
  return fmt::format("- {} | {} | {} | {}\n", row.incident_id, row.start.iso(),
                     join(row.services, ", "), collapse_whitespace(row.title));
}

}  // namespace

DatasetDigest build_dataset_digest(const IncidentDataset& dataset, std::size_t token_budget,
                                   const Registry& registry) {
  if (token_budget < kMinTokenBudget) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("token budget {} is below {}", token_budget, kMinTokenBudget));
  }
  DatasetDigest d;
  d.total_incidents = dataset.records.size();
  d.providers = dataset_summary(dataset, registry);
  if (dataset.records.empty()) {
    for (const auto& s : registry.services()) d.service_counts.emplace_back(s.id, 0);
    return d;
  }

  const AnalysisSelection sel = full_selection(dataset, registry);
  d.service_counts = incident_counts(dataset, sel, registry);
  d.impact = impact_distribution(dataset, sel, registry);

  auto first = dataset.records.front().start;
  auto last = first;
  for (const auto& r : dataset.records) {
    first = std::min(first, r.start);
    last = std::max(last, r.start);
  }
  d.first_date = first.date();
  d.last_date = last.date();

  for (const auto& r : dataset.records) {
    if (!r.end) continue;
    d.longest.push_back({r.incident_id, r.provider, r.title, (*r.end - r.start).count()});
  }
  std::sort(d.longest.begin(), d.longest.end(), [](const auto& a, const auto& b) {
    return a.duration != b.duration ? a.duration > b.duration : a.incident_id < b.incident_id;
  });
  if (d.longest.size() > kLongestIncidents) d.longest.resize(kLongestIncidents);

  std::vector<DigestIndexRow> rows;
  for (const auto& r : dataset.records) {
    rows.push_back({r.incident_id, r.title, r.start, registry.ordered(r.services)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.start != b.start ? a.start < b.start : a.incident_id < b.incident_id;
  });
  d.index_total = rows.size();

  // Keep the newest rows that fit; the summary is never cut.
  const std::size_t budget_chars = token_budget * kCharsPerToken;
  const std::size_t fixed = summary_text(d).size() + index_header(rows.size(), rows.size()).size();
  std::size_t used = fixed;
  std::size_t keep = 0;
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    const std::size_t len = index_row(*it).size();
    if (used + len > budget_chars) break;
    used += len;
    ++keep;
  }
  d.index.assign(rows.end() - static_cast<std::ptrdiff_t>(keep), rows.end());
  d.truncated = keep < rows.size();
  return d;
}

std::string digest_text(const DatasetDigest& digest) {
  std::string out = summary_text(digest);
  out += index_header(digest.index.size(), digest.index_total);
  for (const auto& row : digest.index) out += index_row(row);
  return out;
}

}  // namespace fails
