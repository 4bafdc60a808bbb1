#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fails/analytics.hpp"
#include "fails/model.hpp"
#include "fails/registry.hpp"

namespace fails {

enum class PlotKind {
  kWeeklyOverview,
  kHourlyOverview,
  kMttrDistribution,
  kMttrByProvider,
  kMttrBoxplot,
  kMtbfDistribution,
  kMtbfByProvider,
  kMtbfBoxplot,
  kResolutionActivities,
  kStatusCombinations,
  kDailyAvailability,
  kServiceCooccurrence,
  kCooccurrenceProbability,
  kServiceIncidents,
  kIncidentOutageTimeline,
  kAutocorrelations,
  kIncidentImpactDistribution,
};

inline constexpr std::size_t kPlotKindCount = 17;

/// The catalog in its canonical order.
const std::array<PlotKind, kPlotKindCount>& all_plot_kinds();
/// kebab-case name used by the CLI, the HTTP API and output file names.
std::string_view plot_kind_name(PlotKind kind);
std::optional<PlotKind> plot_kind_from_name(std::string_view name);
/// Human-readable name, e.g. "MTTR Boxplot".
std::string_view plot_kind_title(PlotKind kind);

struct XYPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const XYPoint&) const = default;
};

// Right-continuous step function (empirical CDFs).
struct StepPayload {
  std::vector<XYPoint> points;
  bool operator==(const StepPayload&) const = default;
};
struct LinePayload {
  std::vector<XYPoint> points;
  bool operator==(const LinePayload&) const = default;
};
struct BarPayload {
  std::vector<std::string> categories;
  std::vector<double> values;
  bool operator==(const BarPayload&) const = default;
};
struct BoxPayload {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::vector<double> outliers;
  std::size_t count = 0;
  bool operator==(const BoxPayload&) const = default;
};
struct MatrixPayload {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cells;
  bool operator==(const MatrixPayload&) const = default;
};
struct IntervalPayload {
  std::vector<Interval> intervals;
  bool operator==(const IntervalPayload&) const = default;
};

using SeriesPayload =
    std::variant<StepPayload, LinePayload, BarPayload, BoxPayload, MatrixPayload, IntervalPayload>;

struct Series {
  std::string name;
  SeriesPayload payload;
  bool operator==(const Series&) const = default;
};

struct PlotSpec {
  PlotKind kind = PlotKind::kWeeklyOverview;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> x_ticks;  // category or day labels when relevant
  std::vector<Series> series;
  AnalysisSelection selection;
  std::map<std::string, double> stats;  // always holds n_incidents

  bool operator==(const PlotSpec&) const = default;
};

/// Throws Error(kInsufficientData) naming the kind when the selection
/// lacks the data the kind needs.
PlotSpec build_plot_spec(PlotKind kind, const IncidentDataset& dataset,
                         const AnalysisSelection& sel,
                         const Registry& registry = builtin_registry());

std::string plot_spec_json(const PlotSpec& spec);

enum class ImageFormat { kSvg, kPng };
std::string_view image_format_extension(ImageFormat format);
std::string_view image_format_mime(ImageFormat format);
std::optional<ImageFormat> image_format_from_name(std::string_view name);

inline constexpr int kDefaultWidth = 1600;
inline constexpr int kDefaultHeight = 900;

struct RenderedPlot {
  PlotKind kind = PlotKind::kWeeklyOverview;
  ImageFormat format = ImageFormat::kSvg;
  std::string bytes;
  int width = 0;
  int height = 0;
};

/// Throws kPrecondition for sizes below 100 px, kRenderFailure when the
/// drawing backend fails.
RenderedPlot render(const PlotSpec& spec, ImageFormat format, int width = kDefaultWidth,
                    int height = kDefaultHeight);

/// `<kind>_<from-date>_<to-date>.<ext>`
std::string plot_file_name(PlotKind kind, const AnalysisSelection& sel, ImageFormat format);

struct RenderBatch {
  std::map<PlotKind, RenderedPlot> plots;
  std::map<PlotKind, PlotSpec> specs;
  std::map<PlotKind, std::string> skipped;  // kind -> reason
};

/// Renders each kind; InsufficientData skips that kind only. Throws
/// kPrecondition for an empty kind list.
RenderBatch render_all(const IncidentDataset& dataset, const AnalysisSelection& sel,
                       const std::vector<PlotKind>& kinds, ImageFormat format,
                       const Registry& registry = builtin_registry(),
                       int width = kDefaultWidth, int height = kDefaultHeight);

}  // namespace fails
