#include "fails/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fails/error.hpp"

namespace fails {

namespace {

void require_group(const GroupKey& group, const Registry& registry) {
  const bool known = group.kind == GroupKey::Kind::kByProvider
                         ? registry.find_provider(group.id) != nullptr
                         : registry.find_service(group.id) != nullptr;
  if (!known) throw Error(ErrorCode::kUnknownGroup, "unknown group '" + group.id + "'");
}

double median_of_sorted(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

bool touches(const IncidentRecord& r, const std::string& service) {
  return r.services.count(service) != 0;
}

}  // namespace

bool GroupKey::matches(const IncidentRecord& r) const {
  return kind == Kind::kByProvider ? r.provider == id : touches(r, id);
}

double TimeSeriesBins::total() const {
  double sum = 0.0;
  for (const auto& b : bins) sum += b.value;
  return sum;
}

DurationSamples make_samples(GroupKey group, std::vector<DurationSecs> samples,
                             std::size_t skipped) {
  DurationSamples out;
  out.group = std::move(group);
  out.count = samples.size();
  out.skipped = skipped;
  if (!samples.empty()) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    out.mean = sum / static_cast<double>(sorted.size());
    out.median = median_of_sorted(sorted);
  }
  out.samples = std::move(samples);
  return out;
}

DurationSamples mtbf_samples(const IncidentDataset& dataset, const GroupKey& group,
                             const Registry& registry) {
  require_group(group, registry);
  std::vector<Timestamp> starts;
  for (const auto& r : dataset.records) {
    if (group.matches(r)) starts.push_back(r.start);
  }
  std::sort(starts.begin(), starts.end());
  std::vector<DurationSecs> gaps;
  for (std::size_t i = 1; i < starts.size(); ++i) {
    gaps.push_back((starts[i] - starts[i - 1]).count());
  }
  return make_samples(group, std::move(gaps));
}

DurationSamples mttr_samples(const IncidentDataset& dataset, const GroupKey& group,
                             const Registry& registry) {
  require_group(group, registry);
  std::vector<DurationSecs> spans;
  std::size_t skipped = 0;
  for (const auto& r : dataset.records) {
    if (!group.matches(r)) continue;
    const Timestamp begin = r.stage_time(RecoveryStage::kInvestigating).value_or(r.start);
    std::optional<Timestamp> finish = r.stage_time(RecoveryStage::kResolved);
    if (!finish) finish = r.end;
    if (!finish || *finish < begin) {
      ++skipped;
      continue;
    }
    spans.push_back((*finish - begin).count());
  }
  return make_samples(group, std::move(spans), skipped);
}

EcdfSeries ecdf(const DurationSamples& samples) {
  if (samples.samples.empty()) {
    throw Error(ErrorCode::kEmptySamples, "ECDF of '" + samples.group.id + "' has no samples");
  }
  std::vector<DurationSecs> sorted = samples.samples;
  std::sort(sorted.begin(), sorted.end());
  EcdfSeries out;
  out.group = samples.group;
  out.n = sorted.size();
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.points.push_back({sorted[i], i + 1, static_cast<double>(i + 1) / n});
  }
  return out;
}

double quantile_linear(std::vector<double> sorted_values, double q) {
  if (sorted_values.empty()) return 0.0;
  const double h = (static_cast<double>(sorted_values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

BoxplotStats boxplot(const DurationSamples& samples) {
  if (samples.samples.empty()) {
    throw Error(ErrorCode::kEmptySamples, "boxplot of '" + samples.group.id + "' has no samples");
  }
  std::vector<double> v(samples.samples.begin(), samples.samples.end());
  std::sort(v.begin(), v.end());
  BoxplotStats out;
  out.group = samples.group;
  out.min = v.front();
  out.max = v.back();
  out.q1 = quantile_linear(v, 0.25);
  out.median = quantile_linear(v, 0.5);
  out.q3 = quantile_linear(v, 0.75);
  const double iqr = out.q3 - out.q1;
  out.lower_fence = out.q1 - 1.5 * iqr;
  out.upper_fence = out.q3 + 1.5 * iqr;
  for (double x : v) {
    if (x < out.lower_fence || x > out.upper_fence) out.outliers.push_back(x);
  }
  return out;
}

TimeSeriesBins cooccurrence_histogram(const IncidentDataset& dataset,
                                      const std::string& provider_id,
                                      const Registry& registry) {
  if (registry.find_provider(provider_id) == nullptr) {
    throw Error(ErrorCode::kUnknownGroup, "unknown provider '" + provider_id + "'");
  }
  const std::size_t k = registry.services_of(provider_id).size();
  TimeSeriesBins out;
  out.bin_kind = BinKind::kCategory;
  for (std::size_t i = 1; i <= k; ++i) out.bins.push_back({std::to_string(i), 0.0});
  for (const auto& r : dataset.records) {
    if (r.provider != provider_id) continue;
    const std::size_t n = r.services.size();
    if (n >= 1 && n <= k) out.bins[n - 1].value += 1.0;
  }
  return out;
}

MatrixSeries cooccurrence_matrix(const IncidentDataset& dataset,
                                 const std::vector<std::string>& services) {
  if (services.empty()) throw Error(ErrorCode::kPrecondition, "no services given");
  const std::size_t n = services.size();
  MatrixSeries out{services, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))};
  std::vector<std::size_t> hit;
  for (const auto& r : dataset.records) {
    hit.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (touches(r, services[i])) hit.push_back(i);
    }
    for (std::size_t a : hit) {
      for (std::size_t b : hit) out.cells[a][b] += 1.0;
    }
  }
  return out;
}

MatrixSeries cooccurrence_probability(const IncidentDataset& dataset,
                                      const std::vector<std::string>& services) {
  MatrixSeries counts = cooccurrence_matrix(dataset, services);
  const std::size_t n = services.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double marginal = counts.cells[i][i];
    for (std::size_t j = 0; j < n; ++j) {
      counts.cells[i][j] = marginal > 0 ? counts.cells[i][j] / marginal : 0.0;
    }
  }
  return counts;
}

namespace {

GroupedBins per_service_bins(const IncidentDataset& dataset, const AnalysisSelection& sel,
                             const Registry& registry, BinKind kind,
                             const std::vector<std::string>& labels,
                             unsigned (*bin_of)(Timestamp)) {
  check_selection(sel);
  const IncidentDataset subset = filter_selection(dataset, sel);
  GroupedBins out;
  for (const auto& service : registry.ordered(sel.services)) {
    TimeSeriesBins bins;
    bins.bin_kind = kind;
    for (const auto& l : labels) bins.bins.push_back({l, 0.0});
    for (const auto& r : subset.records) {
      if (touches(r, service)) bins.bins[bin_of(r.start)].value += 1.0;
    }
    out.emplace_back(service, std::move(bins));
  }
  return out;
}

}  // namespace

GroupedBins weekly_overview(const IncidentDataset& dataset, const AnalysisSelection& sel,
                            const Registry& registry) {
  static const std::vector<std::string> kDays = {"Mon", "Tue", "Wed", "Thu",
                                                 "Fri", "Sat", "Sun"};
  return per_service_bins(dataset, sel, registry, BinKind::kDayOfWeek, kDays,
                          [](Timestamp t) { return t.weekday_monday_first(); });
}

GroupedBins hourly_overview(const IncidentDataset& dataset, const AnalysisSelection& sel,
                            const Registry& registry) {
  std::vector<std::string> hours;
  for (int h = 0; h < 24; ++h) hours.push_back((h < 10 ? "0" : "") + std::to_string(h));
  return per_service_bins(dataset, sel, registry, BinKind::kHourOfDay, hours,
                          [](Timestamp t) { return t.hour_of_day(); });
}

std::vector<Timestamp> selection_days(const AnalysisSelection& sel) {
  std::vector<Timestamp> days;
  if (!(sel.from < sel.to)) return days;
  const Timestamp last = (sel.to - Seconds{1}).floor_day();
  for (Timestamp d = sel.from.floor_day(); d <= last; d = d + kDay) days.push_back(d);
  return days;
}

TimeSeriesBins daily_availability(const IncidentDataset& dataset, const std::string& service,
                                  const AnalysisSelection& sel) {
  check_selection(sel);
  std::vector<std::pair<Timestamp, Timestamp>> intervals;
  for (const auto& r : dataset.records) {
    if (!touches(r, service)) continue;
    const Timestamp end = r.end.value_or(std::max(dataset.scraped_at, r.start));
    if (r.start < end) intervals.emplace_back(r.start, end);
  }
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<Timestamp, Timestamp>> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }

  TimeSeriesBins out;
  out.bin_kind = BinKind::kCalendarDay;
  for (const Timestamp day : selection_days(sel)) {
    const Timestamp next = day + kDay;
    std::int64_t covered = 0;
    for (const auto& [a, b] : merged) {
      const Timestamp lo = std::max(a, day);
      const Timestamp hi = std::min(b, next);
      if (lo < hi) covered += (hi - lo).count();
    }
    const double value = 1.0 - static_cast<double>(covered) / static_cast<double>(kDay.count());
    out.bins.push_back({day.date(), std::clamp(value, 0.0, 1.0)});
  }
  return out;
}

std::vector<double> daily_incident_counts(const IncidentDataset& dataset,
                                          const AnalysisSelection& sel) {
  check_selection(sel);
  const auto days = selection_days(sel);
  std::vector<double> counts(days.size(), 0.0);
  if (days.empty()) return counts;
  for (const auto& r : filter_selection(dataset, sel).records) {
    const auto index = (r.start.floor_day() - days.front()) / kDay;
    if (index >= 0 && static_cast<std::size_t>(index) < counts.size()) counts[index] += 1.0;
  }
  return counts;
}

std::vector<AcfPoint> autocorrelation(const IncidentDataset& dataset,
                                      const AnalysisSelection& sel, int max_lag) {
  if (max_lag < 0) throw Error(ErrorCode::kPrecondition, "max_lag must be >= 0");
  const auto x = daily_incident_counts(dataset, sel);
  const std::size_t n = x.size();
  if (n < static_cast<std::size_t>(max_lag) + 2) {
    throw Error(ErrorCode::kPrecondition,
                "selection spans " + std::to_string(n) + " days, autocorrelation needs " +
                    std::to_string(max_lag + 2));
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom == 0.0) {
    throw Error(ErrorCode::kDegenerateSeries, "daily incident counts have zero variance");
  }
  std::vector<AcfPoint> out;
  for (int k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += (x[t] - mean) * (x[t + k] - mean);
    out.push_back({k, num / denom});
  }
  return out;
}

std::string transition_label(Transition t) {
  switch (t) {
    case Transition::kInvestigatingToIdentified: return "S1->S2";
    case Transition::kIdentifiedToMonitoring: return "S2->S3";
    case Transition::kMonitoringToResolved: return "S3->S4";
  }
  return "?";
}

StageDurations stage_durations(const IncidentDataset& dataset, const AnalysisSelection& sel) {
  check_selection(sel);
  const IncidentDataset subset = filter_selection(dataset, sel);
  std::map<Transition, std::vector<DurationSecs>> samples;
  StageDurations out;
  for (const auto& r : subset.records) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& a = r.stage_times[i];
      const auto& b = r.stage_times[i + 1];
      if (!a || !b) continue;
      const auto d = (*b - *a).count();
      if (d < 0) {
        ++out.negative_excluded;
        continue;
      }
      samples[kAllTransitions[i]].push_back(d);
    }
  }
  for (Transition t : kAllTransitions) {
    out.by_transition[t] =
        make_samples(GroupKey{GroupKey::Kind::kByProvider, transition_label(t)}, samples[t]);
  }
  return out;
}

std::string status_combination_label(const IncidentRecord& record) {
  bool present[kStageCount] = {};
  for (const auto& u : record.updates) present[static_cast<std::size_t>(u.stage)] = true;
  std::string label;
  for (auto s : kAllStages) {
    if (!present[static_cast<std::size_t>(s)]) continue;
    if (!label.empty()) label += '+';
    label += stage_label(s);
  }
  return label.empty() ? "(none)" : label;
}

TimeSeriesBins status_combinations(const IncidentDataset& dataset, const AnalysisSelection& sel) {
  check_selection(sel);
  std::map<std::string, double> counts;
  for (const auto& r : filter_selection(dataset, sel).records) {
    counts[status_combination_label(r)] += 1.0;
  }
  TimeSeriesBins out;
  out.bin_kind = BinKind::kCategory;
  for (const auto& [label, n] : counts) out.bins.push_back({label, n});
  std::stable_sort(out.bins.begin(), out.bins.end(),
                   [](const Bin& a, const Bin& b) { return a.value > b.value; });
  return out;
}

std::vector<ImpactDistribution> impact_distribution(const IncidentDataset& dataset,
                                                    const AnalysisSelection& sel,
                                                    const Registry& registry) {
  check_selection(sel);
  const IncidentDataset subset = filter_selection(dataset, sel);
  std::vector<ImpactDistribution> out;
  for (const auto& p : registry.providers()) {
    const auto owned = registry.service_ids_of(p.id);
    const bool selected = std::any_of(owned.begin(), owned.end(), [&](const std::string& s) {
      return sel.services.count(s) != 0;
    });
    if (!selected) continue;
    ImpactDistribution d;
    d.provider = p.id;
    for (int s = 1; s <= 5; ++s) d.bins.bins.push_back({std::to_string(s), 0.0});
    std::vector<double> severities;
    for (const auto& r : subset.records) {
      if (r.provider != p.id) continue;
      const int s = std::clamp(r.impact.severity, 1, 5);
      d.bins.bins[s - 1].value += 1.0;
      severities.push_back(s);
    }
    std::sort(severities.begin(), severities.end());
    d.count = severities.size();
    if (!severities.empty()) {
      d.mean = std::accumulate(severities.begin(), severities.end(), 0.0) /
               static_cast<double>(severities.size());
      d.median = median_of_sorted(severities);
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> incident_counts(const IncidentDataset& dataset,
                                                                 const AnalysisSelection& sel,
                                                                 const Registry& registry) {
  check_selection(sel);
  const IncidentDataset subset = filter_selection(dataset, sel);
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& service : registry.ordered(sel.services)) {
    const auto n = std::count_if(subset.records.begin(), subset.records.end(),
                                 [&](const IncidentRecord& r) { return touches(r, service); });
    out.emplace_back(service, static_cast<std::size_t>(n));
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<Interval>>> timeline_intervals(
    const IncidentDataset& dataset, const AnalysisSelection& sel, const Registry& registry) {
  check_selection(sel);
  const IncidentDataset subset = filter_selection(dataset, sel);
  std::vector<std::pair<std::string, std::vector<Interval>>> out;
  for (const auto& service : registry.ordered(sel.services)) {
    std::vector<Interval> intervals;
    for (const auto& r : subset.records) {
      if (!touches(r, service)) continue;
      if (r.end) {
        intervals.push_back({r.start, *r.end, false});
      } else {
        intervals.push_back({r.start, std::max(dataset.scraped_at, r.start), true});
      }
    }
    std::stable_sort(intervals.begin(), intervals.end(),
                     [](const Interval& a, const Interval& b) { return a.start < b.start; });
    out.emplace_back(service, std::move(intervals));
  }
  return out;
}

std::vector<ProviderSummary> dataset_summary(const IncidentDataset& dataset,
                                             const Registry& registry) {
  std::vector<ProviderSummary> out;
  for (const auto& p : registry.providers()) {
    ProviderSummary s;
    s.provider = p.id;
    std::optional<Timestamp> first, last;
    for (const auto& r : dataset.records) {
      if (r.provider != p.id) continue;
      ++s.reports;
      if (r.impact.level == ImpactLevel::kMaintenance) ++s.maintenance;
      if (!first || r.start < *first) first = r.start;
      if (!last || *last < r.start) last = r.start;
    }
    if (s.reports == 0) continue;
    s.first_date = first->date();
    s.last_date = last->date();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fails
