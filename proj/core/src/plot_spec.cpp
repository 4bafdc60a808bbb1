#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>
#include <json.hpp>

#include "fails/error.hpp"
#include "fails/plot.hpp"
#include "text_util.hpp"

namespace fails {

namespace {

struct KindInfo {
  PlotKind kind;
  std::string_view name;
  std::string_view title;
};

// One row per kind, in catalog order.
constexpr std::array<KindInfo, kPlotKindCount> kKinds = {{
    {PlotKind::kWeeklyOverview, "weekly-overview", "Weekly Overview"},
    {PlotKind::kHourlyOverview, "hourly-overview", "Hourly Overview"},
    {PlotKind::kMttrDistribution, "mttr-distribution", "MTTR Distribution"},
    {PlotKind::kMttrByProvider, "mttr-by-provider", "MTTR by Provider"},
    {PlotKind::kMttrBoxplot, "mttr-boxplot", "MTTR Boxplot"},
    {PlotKind::kMtbfDistribution, "mtbf-distribution", "MTBF Distribution"},
    {PlotKind::kMtbfByProvider, "mtbf-by-provider", "MTBF by Provider"},
    {PlotKind::kMtbfBoxplot, "mtbf-boxplot", "MTBF Boxplot"},
    {PlotKind::kResolutionActivities, "resolution-activities", "Resolution Activities"},
    {PlotKind::kStatusCombinations, "status-combinations", "Status Combinations"},
    {PlotKind::kDailyAvailability, "daily-availability", "Daily Availability"},
    {PlotKind::kServiceCooccurrence, "service-cooccurrence", "Service Co-occurrence"},
    {PlotKind::kCooccurrenceProbability, "cooccurrence-probability", "Co-occurrence Probability"},
    {PlotKind::kServiceIncidents, "service-incidents", "Service Incidents"},
    {PlotKind::kIncidentOutageTimeline, "incident-outage-timeline", "Incident Outage Timeline"},
    {PlotKind::kAutocorrelations, "autocorrelations", "Autocorrelations"},
    {PlotKind::kIncidentImpactDistribution, "incident-impact-distribution",
     "Incident Impact Distribution"},
}};

constexpr bool catalog_in_order() {
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    if (static_cast<std::size_t>(kKinds[i].kind) != i) return false;
  }
  return true;
}
static_assert(catalog_in_order(), "plot catalog must follow the PlotKind enum");
static_assert(static_cast<std::size_t>(PlotKind::kIncidentImpactDistribution) + 1 ==
              kPlotKindCount);

constexpr double kHour = 3600.0;
constexpr double kMinute = 60.0;

[[noreturn]] void insufficient(PlotKind kind, const std::string& why) {
  throw Error(ErrorCode::kInsufficientData,
              fmt::format("{}: {}", plot_kind_name(kind), why));
}

struct Context {
  PlotKind kind;
  const IncidentDataset& dataset;
  const IncidentDataset& subset;
  const AnalysisSelection& sel;
  const Registry& registry;
  PlotSpec& spec;

  std::vector<std::string> services() const { return registry.ordered(sel.services); }

  // Providers owning at least one selected service, registry order.
  std::vector<std::string> providers() const {
    std::vector<std::string> out;
    for (const auto& p : registry.providers()) {
      for (const auto& s : registry.service_ids_of(p.id)) {
        if (sel.services.count(s) != 0) {
          out.push_back(p.id);
          break;
        }
      }
    }
    return out;
  }
};

void put_duration_stats(PlotSpec& spec, const std::string& id, const DurationSamples& s,
                        double unit, std::string_view unit_name) {
  spec.stats[fmt::format("mean_{}:{}", unit_name, id)] = s.mean / unit;
  spec.stats[fmt::format("median_{}:{}", unit_name, id)] = s.median / unit;
  spec.stats[fmt::format("count:{}", id)] = static_cast<double>(s.count);
}

void put_pooled_stats(PlotSpec& spec, const std::vector<DurationSecs>& pooled,
                      std::string_view unit_name, double unit) {
  const auto all = make_samples(GroupKey::provider("all"), pooled);
  spec.stats[fmt::format("mean_{}", unit_name)] = all.mean / unit;
  spec.stats[fmt::format("median_{}", unit_name)] = all.median / unit;
  spec.stats["samples"] = static_cast<double>(all.count);
}

using SampleFn = DurationSamples (*)(const IncidentDataset&, const GroupKey&, const Registry&);

std::vector<DurationSamples> grouped_samples(const Context& c, SampleFn fn, bool by_provider) {
  std::vector<DurationSamples> out;
  const auto ids = by_provider ? c.providers() : c.services();
  for (const auto& id : ids) {
    const GroupKey key = by_provider ? GroupKey::provider(id) : GroupKey::service(id);
    out.push_back(fn(c.subset, key, c.registry));
  }
  return out;
}

void build_ecdf(Context& c, SampleFn fn, bool by_provider, std::string_view what) {
  std::vector<DurationSecs> pooled;
  for (const auto& s : grouped_samples(c, fn, by_provider)) {
    if (s.samples.empty()) continue;
    const EcdfSeries e = ecdf(s);
    StepPayload step;
    for (const auto& p : e.points) step.points.push_back({static_cast<double>(p.x) / kHour, p.p});
    c.spec.series.push_back({s.group.id, std::move(step)});
    put_duration_stats(c.spec, s.group.id, s, kHour, "hours");
    pooled.insert(pooled.end(), s.samples.begin(), s.samples.end());
  }
  if (c.spec.series.empty()) insufficient(c.kind, fmt::format("no {} samples in selection", what));
  put_pooled_stats(c.spec, pooled, "hours", kHour);
  c.spec.x_label = fmt::format("{} (hours)", what);
  c.spec.y_label = "Cumulative probability";
}

BoxPayload to_box(const BoxplotStats& b, std::size_t count, double unit) {
  BoxPayload box;
  box.min = b.min / unit;
  box.q1 = b.q1 / unit;
  box.median = b.median / unit;
  box.q3 = b.q3 / unit;
  box.max = b.max / unit;
  for (double o : b.outliers) box.outliers.push_back(o / unit);
  box.count = count;
  return box;
}

void build_box(Context& c, SampleFn fn, std::string_view what) {
  std::vector<DurationSecs> pooled;
  for (const auto& s : grouped_samples(c, fn, false)) {
    if (s.samples.empty()) continue;
    c.spec.series.push_back({s.group.id, to_box(boxplot(s), s.count, kHour)});
    c.spec.x_ticks.push_back(s.group.id);
    put_duration_stats(c.spec, s.group.id, s, kHour, "hours");
    pooled.insert(pooled.end(), s.samples.begin(), s.samples.end());
  }
  if (c.spec.series.empty()) insufficient(c.kind, fmt::format("no {} samples in selection", what));
  put_pooled_stats(c.spec, pooled, "hours", kHour);
  c.spec.x_label = "Service";
  c.spec.y_label = fmt::format("{} (hours)", what);
}

void build_overview(Context& c, const GroupedBins& grouped, std::string x_label) {
  for (const auto& [service, bins] : grouped) {
    BarPayload bar;
    for (const auto& b : bins.bins) {
      bar.categories.push_back(b.label);
      bar.values.push_back(b.value);
    }
    if (c.spec.x_ticks.empty()) c.spec.x_ticks = bar.categories;
    c.spec.stats["count:" + service] = bins.total();
    c.spec.series.push_back({service, std::move(bar)});
  }
  c.spec.x_label = std::move(x_label);
  c.spec.y_label = "Incidents";
}

void build_matrix(Context& c, const MatrixSeries& m, std::string_view stat_prefix) {
  MatrixPayload payload{m.labels, m.cells};
  double max_off = 0.0;
  std::string max_pair;
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    for (std::size_t j = 0; j < m.cells[i].size(); ++j) {
      if (i == j) continue;
      if (m.cells[i][j] > max_off) {
        max_off = m.cells[i][j];
        max_pair = m.labels[i] + "|" + m.labels[j];
      }
    }
  }
  c.spec.stats[fmt::format("{}_max_offdiagonal", stat_prefix)] = max_off;
  if (!max_pair.empty()) c.spec.stats[fmt::format("{}:{}", stat_prefix, max_pair)] = max_off;
  c.spec.x_ticks = m.labels;
  c.spec.series.push_back({std::string(stat_prefix), std::move(payload)});
  c.spec.x_label = "Service";
  c.spec.y_label = "Service";
}

void build_kind(Context& c) {
  PlotSpec& spec = c.spec;
  switch (c.kind) {
    case PlotKind::kWeeklyOverview:
      build_overview(c, weekly_overview(c.dataset, c.sel, c.registry), "Day of week");
      return;
    case PlotKind::kHourlyOverview:
      build_overview(c, hourly_overview(c.dataset, c.sel, c.registry), "Hour of day (UTC)");
      return;
    case PlotKind::kMttrDistribution:
      build_ecdf(c, &mttr_samples, false, "Time to recovery");
      return;
    case PlotKind::kMttrByProvider:
      build_ecdf(c, &mttr_samples, true, "Time to recovery");
      return;
    case PlotKind::kMttrBoxplot:
      build_box(c, &mttr_samples, "Time to recovery");
      return;
    case PlotKind::kMtbfDistribution:
      build_ecdf(c, &mtbf_samples, false, "Time between failures");
      return;
    case PlotKind::kMtbfByProvider:
      build_ecdf(c, &mtbf_samples, true, "Time between failures");
      return;
    case PlotKind::kMtbfBoxplot:
      build_box(c, &mtbf_samples, "Time between failures");
      return;
    case PlotKind::kResolutionActivities: {
      const StageDurations d = stage_durations(c.dataset, c.sel);
      for (Transition t : kAllTransitions) {
        const auto it = d.by_transition.find(t);
        if (it == d.by_transition.end() || it->second.samples.empty()) continue;
        const std::string label = transition_label(t);
        spec.series.push_back({label, to_box(boxplot(it->second), it->second.count, kMinute)});
        spec.x_ticks.push_back(label);
        put_duration_stats(spec, label, it->second, kMinute, "minutes");
      }
      if (spec.series.empty()) insufficient(c.kind, "no consecutive stage pairs in selection");
      spec.stats["negative_excluded"] = static_cast<double>(d.negative_excluded);
      spec.x_label = "Stage transition";
      spec.y_label = "Duration (minutes)";
      return;
    }
    case PlotKind::kStatusCombinations: {
      const TimeSeriesBins bins = status_combinations(c.dataset, c.sel);
      BarPayload bar;
      for (const auto& b : bins.bins) {
        bar.categories.push_back(b.label);
        bar.values.push_back(b.value);
        spec.stats["count:" + b.label] = b.value;
      }
      spec.x_ticks = bar.categories;
      spec.series.push_back({"incidents", std::move(bar)});
      spec.x_label = "Stages present";
      spec.y_label = "Incidents";
      return;
    }
    case PlotKind::kDailyAvailability: {
      for (const auto& service : c.services()) {
        const TimeSeriesBins bins = daily_availability(c.dataset, service, c.sel);
        LinePayload line;
        double sum = 0.0, lowest = 1.0;
        for (std::size_t i = 0; i < bins.bins.size(); ++i) {
          line.points.push_back({static_cast<double>(i), bins.bins[i].value});
          sum += bins.bins[i].value;
          lowest = std::min(lowest, bins.bins[i].value);
        }
        if (spec.x_ticks.empty()) {
          for (const auto& b : bins.bins) spec.x_ticks.push_back(b.label);
        }
        if (!bins.bins.empty()) {
          spec.stats["mean_availability:" + service] = sum / static_cast<double>(bins.bins.size());
          spec.stats["min_availability:" + service] = lowest;
        }
        spec.series.push_back({service, std::move(line)});
      }
      spec.stats["days"] = static_cast<double>(spec.x_ticks.size());
      spec.x_label = "Day (UTC)";
      spec.y_label = "Availability";
      return;
    }
    case PlotKind::kServiceCooccurrence: {
      build_matrix(c, cooccurrence_matrix(c.subset, c.services()), "cooccurrence");
      for (const auto& p : c.providers()) {
        const TimeSeriesBins h = cooccurrence_histogram(c.subset, p, c.registry);
        for (const auto& b : h.bins) {
          spec.stats[fmt::format("incidents_with_{}_services:{}", b.label, p)] = b.value;
        }
      }
      return;
    }
    case PlotKind::kCooccurrenceProbability:
      build_matrix(c, cooccurrence_probability(c.subset, c.services()), "probability");
      return;
    case PlotKind::kServiceIncidents: {
      BarPayload bar;
      for (const auto& [service, n] : incident_counts(c.dataset, c.sel, c.registry)) {
        bar.categories.push_back(service);
        bar.values.push_back(static_cast<double>(n));
        spec.stats["count:" + service] = static_cast<double>(n);
      }
      spec.x_ticks = bar.categories;
      spec.series.push_back({"incidents", std::move(bar)});
      spec.x_label = "Service";
      spec.y_label = "Incidents";
      return;
    }
    case PlotKind::kIncidentOutageTimeline: {
      for (auto& [service, intervals] : timeline_intervals(c.dataset, c.sel, c.registry)) {
        double hours = 0.0;
        for (const auto& iv : intervals) hours += static_cast<double>((iv.end - iv.start).count()) / kHour;
        spec.stats["count:" + service] = static_cast<double>(intervals.size());
        spec.stats["outage_hours:" + service] = hours;
        spec.x_ticks.push_back(service);
        spec.series.push_back({service, IntervalPayload{std::move(intervals)}});
      }
      spec.x_label = "Time (UTC)";
      spec.y_label = "Service";
      return;
    }
    case PlotKind::kAutocorrelations: {
      const std::size_t days = selection_days(c.sel).size();
      if (days < 3) insufficient(c.kind, "selection spans fewer than 3 days");
      const int max_lag = std::min<int>(kDefaultMaxLag, static_cast<int>(days) - 2);
      std::vector<AcfPoint> acf;
      try {
        acf = autocorrelation(c.dataset, c.sel, max_lag);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSeries) throw;
        insufficient(c.kind, "daily incident counts are constant");
      }
      LinePayload line;
      for (const auto& p : acf) {
        line.points.push_back({static_cast<double>(p.lag), p.value});
        if (p.lag == 1 || p.lag == 7 || p.lag == max_lag) {
          spec.stats[fmt::format("r_lag{}", p.lag)] = p.value;
        }
      }
      spec.stats["max_lag"] = max_lag;
      spec.stats["days"] = static_cast<double>(days);
      spec.series.push_back({"acf", std::move(line)});
      spec.x_label = "Lag (days)";
      spec.y_label = "Autocorrelation";
      return;
    }
    case PlotKind::kIncidentImpactDistribution: {
      for (const auto& d : impact_distribution(c.dataset, c.sel, c.registry)) {
        BarPayload bar;
        for (const auto& b : d.bins.bins) {
          bar.categories.push_back(b.label);
          bar.values.push_back(b.value);
        }
        if (spec.x_ticks.empty()) spec.x_ticks = bar.categories;
        spec.stats["mean_severity:" + d.provider] = d.mean;
        spec.stats["median_severity:" + d.provider] = d.median;
        spec.stats["count:" + d.provider] = static_cast<double>(d.count);
        spec.series.push_back({d.provider, std::move(bar)});
      }
      spec.x_label = "Severity score";
      spec.y_label = "Incidents";
      return;
    }
  }
  throw Error(ErrorCode::kPrecondition, "unhandled plot kind");
}

nlohmann::json payload_json(const SeriesPayload& payload) {
  using nlohmann::json;
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        json j;
        if constexpr (std::is_same_v<T, StepPayload> || std::is_same_v<T, LinePayload>) {
          j["type"] = std::is_same_v<T, StepPayload> ? "step" : "line";
          j["points"] = json::array();
          for (const auto& pt : p.points) j["points"].push_back({pt.x, pt.y});
        } else if constexpr (std::is_same_v<T, BarPayload>) {
          j["type"] = "bar";
          j["categories"] = p.categories;
          j["values"] = p.values;
        } else if constexpr (std::is_same_v<T, BoxPayload>) {
          j["type"] = "box";
          j["min"] = p.min;
          j["q1"] = p.q1;
          j["median"] = p.median;
          j["q3"] = p.q3;
          j["max"] = p.max;
          j["outliers"] = p.outliers;
          j["count"] = p.count;
        } else if constexpr (std::is_same_v<T, MatrixPayload>) {
          j["type"] = "matrix";
          j["labels"] = p.labels;
          j["cells"] = p.cells;
        } else {
          j["type"] = "interval";
          j["intervals"] = json::array();
          for (const auto& iv : p.intervals) {
            j["intervals"].push_back(
                {{"start", iv.start.iso()}, {"end", iv.end.iso()}, {"open", iv.open}});
          }
        }
        return j;
      },
      payload);
}

}  // namespace

const std::array<PlotKind, kPlotKindCount>& all_plot_kinds() {
  static const std::array<PlotKind, kPlotKindCount> kinds = [] {
    std::array<PlotKind, kPlotKindCount> out{};
    for (std::size_t i = 0; i < kKinds.size(); ++i) out[i] = kKinds[i].kind;
    return out;
  }();
  return kinds;
}

std::string_view plot_kind_name(PlotKind kind) {
  return kKinds[static_cast<std::size_t>(kind)].name;
}

std::optional<PlotKind> plot_kind_from_name(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

std::string_view plot_kind_title(PlotKind kind) {
  return kKinds[static_cast<std::size_t>(kind)].title;
}

PlotSpec build_plot_spec(PlotKind kind, const IncidentDataset& dataset,
                         const AnalysisSelection& sel, const Registry& registry) {
  check_selection(sel);
  for (const auto& s : sel.services) {
    if (registry.find_service(s) == nullptr) {
      throw Error(ErrorCode::kUnknownService, "unknown service '" + s + "'");
    }
  }
  const IncidentDataset subset = filter_selection(dataset, sel);
  if (subset.records.empty()) insufficient(kind, "no incidents in selection");

  PlotSpec spec;
  spec.kind = kind;
  spec.title = fmt::format("{} ({} to {})", plot_kind_title(kind), sel.from.date(),
                           (sel.to - Seconds{1}).date());
  spec.selection = sel;
  spec.stats["n_incidents"] = static_cast<double>(subset.records.size());
  Context c{kind, dataset, subset, sel, registry, spec};
  build_kind(c);
  return spec;
}

std::string plot_spec_json(const PlotSpec& spec) {
  nlohmann::json j;
  j["kind"] = plot_kind_name(spec.kind);
  j["title"] = spec.title;
  j["x_label"] = spec.x_label;
  j["y_label"] = spec.y_label;
  j["x_ticks"] = spec.x_ticks;
  j["selection"] = {{"from", spec.selection.from.iso()},
                    {"to", spec.selection.to.iso()},
                    {"services", spec.selection.services}};
  j["series"] = nlohmann::json::array();
  for (const auto& s : spec.series) {
    j["series"].push_back({{"name", s.name}, {"payload", payload_json(s.payload)}});
  }
  j["stats"] = spec.stats;
  return j.dump();
}

std::string_view image_format_extension(ImageFormat format) {
  return format == ImageFormat::kPng ? "png" : "svg";
}

std::string_view image_format_mime(ImageFormat format) {
  return format == ImageFormat::kPng ? "image/png" : "image/svg+xml";
}

std::optional<ImageFormat> image_format_from_name(std::string_view name) {
  const std::string lower = ascii_lower(name);
  if (lower == "png") return ImageFormat::kPng;
  if (lower == "svg") return ImageFormat::kSvg;
  return std::nullopt;
}

std::string plot_file_name(PlotKind kind, const AnalysisSelection& sel, ImageFormat format) {
  return fmt::format("{}_{}_{}.{}", plot_kind_name(kind), sel.from.date(),
                     (sel.to - Seconds{1}).date(), image_format_extension(format));
}

}  // namespace fails
