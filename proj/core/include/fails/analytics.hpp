#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fails/model.hpp"
#include "fails/registry.hpp"

namespace fails {

// Every duration exchanged by this module is an integer number of seconds.
using DurationSecs = std::int64_t;

struct GroupKey {
  enum class Kind { kByProvider, kByService };
  Kind kind = Kind::kByProvider;
  std::string id;

  static GroupKey provider(std::string id) { return {Kind::kByProvider, std::move(id)}; }
  static GroupKey service(std::string id) { return {Kind::kByService, std::move(id)}; }
  bool matches(const IncidentRecord& r) const;
  bool operator==(const GroupKey&) const = default;
};

struct DurationSamples {
  GroupKey group;
  std::vector<DurationSecs> samples;
  double mean = 0.0;
  double median = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;  // incidents without a usable pair of times
};

/// Recomputes count/mean/median from samples.
DurationSamples make_samples(GroupKey group, std::vector<DurationSecs> samples,
                             std::size_t skipped = 0);

struct EcdfPoint {
  DurationSecs x = 0;
  std::size_t cumulative = 0;  // #samples <= x
  double p = 0.0;              // cumulative / n
};

struct EcdfSeries {
  GroupKey group;
  std::size_t n = 0;
  std::vector<EcdfPoint> points;
};

struct BoxplotStats {
  GroupKey group;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double lower_fence = 0, upper_fence = 0;
  std::vector<double> outliers;
};

struct MatrixSeries {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cells;
};

enum class BinKind { kDayOfWeek, kHourOfDay, kCalendarDay, kCategory };

struct Bin {
  std::string label;
  double value = 0.0;
};

struct TimeSeriesBins {
  BinKind bin_kind = BinKind::kCategory;
  std::vector<Bin> bins;
  double total() const;
};

/// Named bins per service or provider id, in registry order.
using GroupedBins = std::vector<std::pair<std::string, TimeSeriesBins>>;

// Throws Error(kUnknownGroup) for ids missing from the registry.
DurationSamples mtbf_samples(const IncidentDataset& dataset, const GroupKey& group,
                             const Registry& registry = builtin_registry());
DurationSamples mttr_samples(const IncidentDataset& dataset, const GroupKey& group,
                             const Registry& registry = builtin_registry());

/// Throws Error(kEmptySamples) when there are no samples.
EcdfSeries ecdf(const DurationSamples& samples);
/// Quartiles by linear interpolation between closest ranks
/// (position (n - 1) * q); outliers outside the 1.5 IQR fences.
BoxplotStats boxplot(const DurationSamples& samples);
double quantile_linear(std::vector<double> sorted_values, double q);

/// Histogram of |services| per incident of one provider, bins 1..k.
TimeSeriesBins cooccurrence_histogram(const IncidentDataset& dataset,
                                      const std::string& provider_id,
                                      const Registry& registry = builtin_registry());
MatrixSeries cooccurrence_matrix(const IncidentDataset& dataset,
                                 const std::vector<std::string>& services);
/// Row-normalized: cell (i, j) = P(j affected | i affected).
MatrixSeries cooccurrence_probability(const IncidentDataset& dataset,
                                      const std::vector<std::string>& services);

GroupedBins weekly_overview(const IncidentDataset& dataset, const AnalysisSelection& sel,
                            const Registry& registry = builtin_registry());
GroupedBins hourly_overview(const IncidentDataset& dataset, const AnalysisSelection& sel,
                            const Registry& registry = builtin_registry());

/// UTC days of a selection: floor(from) up to the day holding the last
/// second before `to`.
std::vector<Timestamp> selection_days(const AnalysisSelection& sel);

/// Per-day uptime fraction for one service using the union of its incident
/// intervals; open incidents run until dataset.scraped_at.
TimeSeriesBins daily_availability(const IncidentDataset& dataset, const std::string& service,
                                  const AnalysisSelection& sel);

/// Incidents (not incident-service pairs) starting on each selection day.
std::vector<double> daily_incident_counts(const IncidentDataset& dataset,
                                          const AnalysisSelection& sel);

struct AcfPoint {
  int lag = 0;
  double value = 0.0;
};

inline constexpr int kDefaultMaxLag = 30;

/// Biased sample ACF of the daily count series. Throws kPrecondition when
/// the selection has fewer than max_lag + 2 days, kDegenerateSeries when
/// the series is constant.
std::vector<AcfPoint> autocorrelation(const IncidentDataset& dataset,
                                      const AnalysisSelection& sel, int max_lag);

enum class Transition { kInvestigatingToIdentified, kIdentifiedToMonitoring, kMonitoringToResolved };
inline constexpr Transition kAllTransitions[] = {Transition::kInvestigatingToIdentified,
                                                 Transition::kIdentifiedToMonitoring,
                                                 Transition::kMonitoringToResolved};
/// "S1->S2", ...
std::string transition_label(Transition t);

struct StageDurations {
  std::map<Transition, DurationSamples> by_transition;
  std::size_t negative_excluded = 0;
};

StageDurations stage_durations(const IncidentDataset& dataset, const AnalysisSelection& sel);

/// Label of the stage set present in an incident's updates, e.g. "S1+S4";
/// "(none)" when there are no updates.
std::string status_combination_label(const IncidentRecord& record);
TimeSeriesBins status_combinations(const IncidentDataset& dataset, const AnalysisSelection& sel);

struct ImpactDistribution {
  std::string provider;
  TimeSeriesBins bins;  // "1".."5"
  double mean = 0.0;
  double median = 0.0;
  std::size_t count = 0;
};

/// One entry per provider owning a selected service, registry order.
std::vector<ImpactDistribution> impact_distribution(const IncidentDataset& dataset,
                                                    const AnalysisSelection& sel,
                                                    const Registry& registry = builtin_registry());

std::vector<std::pair<std::string, std::size_t>> incident_counts(
    const IncidentDataset& dataset, const AnalysisSelection& sel,
    const Registry& registry = builtin_registry());

struct Interval {
  Timestamp start;
  Timestamp end;
  bool open = false;  // closed at scraped_at
  bool operator==(const Interval&) const = default;
};

std::vector<std::pair<std::string, std::vector<Interval>>> timeline_intervals(
    const IncidentDataset& dataset, const AnalysisSelection& sel,
    const Registry& registry = builtin_registry());

struct ProviderSummary {
  std::string provider;
  std::string first_date;  // YYYY-MM-DD of the earliest start
  std::string last_date;   // YYYY-MM-DD of the latest start
  std::size_t reports = 0;
  std::size_t maintenance = 0;
};

/// Providers with at least one record, registry order.
std::vector<ProviderSummary> dataset_summary(const IncidentDataset& dataset,
                                             const Registry& registry = builtin_registry());

}  // namespace fails
