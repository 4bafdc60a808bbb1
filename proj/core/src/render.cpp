#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "canvas.hpp"
#include "fails/error.hpp"
#include "fails/plot.hpp"

namespace fails {

namespace {

using draw::Anchor;
using draw::Canvas;
using draw::Color;
using draw::Point;

constexpr std::array<const char*, 12> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a"};

const Color kInk{0x22, 0x22, 0x22};
const Color kGrid{0xe3, 0xe3, 0xe3};
const Color kAxis{0x55, 0x55, 0x55};

// Services keep their registry color across plots; providers and other
// series names fall back to their position.
Color series_color(const std::string& name, std::size_t position) {
  const Registry& reg = builtin_registry();
  std::size_t slot = reg.service_index(name);
  if (slot >= reg.services().size()) {
    slot = position;
    for (std::size_t i = 0; i < reg.providers().size(); ++i) {
      if (reg.providers()[i].id == name) slot = i * 3;
    }
  }
  return draw::parse_hex(kPalette[slot % kPalette.size()]);
}

std::string num(double v) {
  if (std::abs(v) < 1e-12) return "0";
  if (std::abs(v) >= 1e5 || std::abs(v) < 1e-3) return fmt::format("{:.3g}", v);
  std::string s = fmt::format("{:.3f}", v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return lo > hi; }
};

std::vector<double> nice_ticks(Range& r, int target = 6) {
  if (r.empty()) r = {0.0, 1.0};
  if (r.hi - r.lo < 1e-12) {
    r.hi = r.lo + 1.0;
  }
  const double raw = (r.hi - r.lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (raw <= step) break;
  }
  r.lo = std::floor(r.lo / step + 1e-9) * step;
  r.hi = std::ceil(r.hi / step - 1e-9) * step;
  std::vector<double> ticks;
  for (double v = r.lo; v <= r.hi + step * 1e-6; v += step) ticks.push_back(v);
  return ticks;
}

struct Layout {
  int width, height;
  double left, top, right, bottom;  // plot area
  double title_size, label_size, tick_size;

  Layout(int w, int h) : width(w), height(h) {
    title_size = std::max(12.0, h / 30.0);
    label_size = std::max(10.0, h / 45.0);
    tick_size = std::max(8.0, h / 60.0);
    left = std::max(60.0, w * 0.09);
    right = w - std::max(80.0, w * 0.17);
    top = std::max(30.0, h * 0.10);
    bottom = h - std::max(50.0, h * 0.16);
  }
  double sx(double v, const Range& r) const { return left + (v - r.lo) / (r.hi - r.lo) * (right - left); }
  double sy(double v, const Range& r) const { return bottom - (v - r.lo) / (r.hi - r.lo) * (bottom - top); }
};

void draw_chrome(Canvas& c, const Layout& L, const PlotSpec& spec) {
  c.text({L.width / 2.0, L.top * 0.55}, spec.title, L.title_size, Anchor::kMiddle, kInk);
  c.text({(L.left + L.right) / 2.0, L.height - L.tick_size * 0.8}, spec.x_label, L.label_size,
         Anchor::kMiddle, kInk);
  c.text({L.label_size * 1.4, (L.top + L.bottom) / 2.0}, spec.y_label, L.label_size,
         Anchor::kMiddle, kInk, true);
}

void draw_legend(Canvas& c, const Layout& L, const PlotSpec& spec) {
  const double x = L.right + L.tick_size * 1.5;
  double y = L.top + L.tick_size;
  const double step = L.tick_size * 1.6;
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    if (y > L.height - step) break;
    c.rect(x, y - L.tick_size * 0.8, L.tick_size, L.tick_size, series_color(s.name, i));
    c.text({x + L.tick_size * 1.5, y}, s.name, L.tick_size, Anchor::kStart, kInk);
    y += step;
  }
}

void draw_y_axis(Canvas& c, const Layout& L, const Range& yr, const std::vector<double>& ticks) {
  for (double t : ticks) {
    const double y = L.sy(t, yr);
    c.line({L.left, y}, {L.right, y}, kGrid, 1);
    c.text({L.left - L.tick_size * 0.5, y + L.tick_size * 0.35}, num(t), L.tick_size, Anchor::kEnd,
           kAxis);
  }
  c.line({L.left, L.top}, {L.left, L.bottom}, kAxis, 1.5);
  c.line({L.left, L.bottom}, {L.right, L.bottom}, kAxis, 1.5);
}

void x_tick_label(Canvas& c, const Layout& L, double x, const std::string& label, bool vertical) {
  c.line({x, L.bottom}, {x, L.bottom + L.tick_size * 0.4}, kAxis, 1);
  if (vertical) {
    c.text({x + L.tick_size * 0.35, L.bottom + L.tick_size * 0.8}, label, L.tick_size,
           Anchor::kEnd, kAxis, true);
  } else {
    c.text({x, L.bottom + L.tick_size * 1.5}, label, L.tick_size, Anchor::kMiddle, kAxis);
  }
}

// Category labels go vertical when they would overlap horizontally.
bool crowded(const Layout& L, const std::vector<std::string>& labels) {
  if (labels.empty()) return false;
  std::size_t longest = 0;
  for (const auto& l : labels) longest = std::max(longest, l.size());
  const double slot = (L.right - L.left) / static_cast<double>(labels.size());
  return static_cast<double>(longest) * L.tick_size * 0.6 > slot * 0.95;
}

void draw_xy(Canvas& c, const Layout& L, const PlotSpec& spec) {
  Range xr, yr;
  yr.add(0.0);
  bool step = false;
  for (const auto& s : spec.series) {
    const auto* pts = std::holds_alternative<StepPayload>(s.payload)
                          ? &std::get<StepPayload>(s.payload).points
                          : &std::get<LinePayload>(s.payload).points;
    step = step || std::holds_alternative<StepPayload>(s.payload);
    for (const auto& p : *pts) {
      xr.add(p.x);
      yr.add(p.y);
    }
  }
  if (step) xr.add(0.0);
  const bool dated = !spec.x_ticks.empty();
  std::vector<double> xt;
  if (dated) {
    if (xr.empty() || xr.hi - xr.lo < 1) xr = {0.0, std::max(1.0, xr.empty() ? 1.0 : xr.hi)};
    const std::size_t n = spec.x_ticks.size();
    const std::size_t every = std::max<std::size_t>(1, (n + 7) / 8);
    for (std::size_t i = 0; i < n; i += every) xt.push_back(static_cast<double>(i));
  } else {
    xt = nice_ticks(xr);
  }
  const auto yt = nice_ticks(yr);
  draw_y_axis(c, L, yr, yt);
  for (double t : xt) {
    const std::string label = dated ? spec.x_ticks[static_cast<std::size_t>(t)] : num(t);
    x_tick_label(c, L, L.sx(t, xr), label, false);
  }
  if (yr.lo < 0 && yr.hi > 0) {
    c.line({L.left, L.sy(0, yr)}, {L.right, L.sy(0, yr)}, kAxis, 1);
  }
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    const Color col = series_color(s.name, i);
    std::vector<Point> line;
    if (const auto* sp = std::get_if<StepPayload>(&s.payload)) {
      double last = 0.0;
      line.push_back({L.sx(xr.lo, xr), L.sy(0.0, yr)});
      for (const auto& p : sp->points) {
        line.push_back({L.sx(p.x, xr), L.sy(last, yr)});
        line.push_back({L.sx(p.x, xr), L.sy(p.y, yr)});
        last = p.y;
      }
      line.push_back({L.sx(xr.hi, xr), L.sy(last, yr)});
    } else {
      for (const auto& p : std::get<LinePayload>(s.payload).points) {
        line.push_back({L.sx(p.x, xr), L.sy(p.y, yr)});
      }
      if (line.size() == 1) c.circle(line.front(), 3, col);
    }
    c.polyline(line, col, 2.5);
  }
}

void draw_bars(Canvas& c, const Layout& L, const PlotSpec& spec) {
  std::vector<std::string> cats = spec.x_ticks;
  if (cats.empty() && !spec.series.empty()) cats = std::get<BarPayload>(spec.series[0].payload).categories;
  Range yr;
  yr.add(0.0);
  for (const auto& s : spec.series) {
    for (double v : std::get<BarPayload>(s.payload).values) yr.add(v);
  }
  const auto yt = nice_ticks(yr);
  draw_y_axis(c, L, yr, yt);
  if (cats.empty()) return;
  const double slot = (L.right - L.left) / static_cast<double>(cats.size());
  const double groups = static_cast<double>(std::max<std::size_t>(1, spec.series.size()));
  const double bar = slot * 0.8 / groups;
  const bool vertical = crowded(L, cats);
  for (std::size_t k = 0; k < cats.size(); ++k) {
    x_tick_label(c, L, L.left + slot * (k + 0.5), cats[k], vertical);
  }
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& b = std::get<BarPayload>(spec.series[i].payload);
    const Color col = series_color(spec.series[i].name, i);
    for (std::size_t k = 0; k < b.values.size() && k < cats.size(); ++k) {
      const double x = L.left + slot * k + slot * 0.1 + bar * i;
      const double y = L.sy(b.values[k], yr);
      if (b.values[k] > 0) c.rect(x, y, bar, L.bottom - y, col);
    }
  }
}

void draw_boxes(Canvas& c, const Layout& L, const PlotSpec& spec) {
  Range yr;
  yr.add(0.0);
  std::vector<std::string> names;
  for (const auto& s : spec.series) {
    const auto& b = std::get<BoxPayload>(s.payload);
    yr.add(b.min);
    yr.add(b.max);
    for (double o : b.outliers) yr.add(o);
    names.push_back(s.name);
  }
  const auto yt = nice_ticks(yr);
  draw_y_axis(c, L, yr, yt);
  if (names.empty()) return;
  const double slot = (L.right - L.left) / static_cast<double>(names.size());
  const bool vertical = crowded(L, names);
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& b = std::get<BoxPayload>(spec.series[i].payload);
    const Color col = series_color(spec.series[i].name, i);
    const double cx = L.left + slot * (i + 0.5);
    const double half = std::min(slot * 0.3, 60.0);
    x_tick_label(c, L, cx, names[i], vertical);
    const double lo_whisker = std::max(b.min, b.q1 - 1.5 * (b.q3 - b.q1));
    const double hi_whisker = std::min(b.max, b.q3 + 1.5 * (b.q3 - b.q1));
    c.line({cx, L.sy(lo_whisker, yr)}, {cx, L.sy(b.q1, yr)}, kAxis, 1.5);
    c.line({cx, L.sy(b.q3, yr)}, {cx, L.sy(hi_whisker, yr)}, kAxis, 1.5);
    c.line({cx - half / 2, L.sy(lo_whisker, yr)}, {cx + half / 2, L.sy(lo_whisker, yr)}, kAxis, 1.5);
    c.line({cx - half / 2, L.sy(hi_whisker, yr)}, {cx + half / 2, L.sy(hi_whisker, yr)}, kAxis, 1.5);
    const double top = L.sy(b.q3, yr);
    const double height = std::max(1.0, L.sy(b.q1, yr) - top);
    c.rect(cx - half, top, 2 * half, height, col);
    c.frame(cx - half, top, 2 * half, height, kInk, 1);
    c.line({cx - half, L.sy(b.median, yr)}, {cx + half, L.sy(b.median, yr)}, kInk, 2.5);
    for (double o : b.outliers) c.circle({cx, L.sy(o, yr)}, 3.5, col);
  }
}

void draw_matrix(Canvas& c, const Layout& L, const PlotSpec& spec) {
  if (spec.series.empty()) return;
  const auto& m = std::get<MatrixPayload>(spec.series[0].payload);
  const std::size_t n = m.labels.size();
  if (n == 0) return;
  double max = 0.0;
  for (const auto& row : m.cells) {
    for (double v : row) max = std::max(max, v);
  }
  const double label_room = L.tick_size * 9;
  const double side = std::min(L.right - L.left - label_room, L.bottom - L.top - label_room);
  const double cell = side / static_cast<double>(n);
  const double x0 = L.left + label_room;
  const double y0 = L.top;
  const Color hot{0xc0, 0x39, 0x2b};
  const bool integral = std::all_of(m.cells.begin(), m.cells.end(), [](const auto& row) {
    return std::all_of(row.begin(), row.end(), [](double v) { return v == std::floor(v); });
  });
  for (std::size_t i = 0; i < n; ++i) {
    c.text({x0 - L.tick_size * 0.5, y0 + cell * (i + 0.5) + L.tick_size * 0.35}, m.labels[i],
           L.tick_size, Anchor::kEnd, kInk);
    c.text({x0 + cell * (i + 0.5) + L.tick_size * 0.35, y0 + side + L.tick_size * 0.6},
           m.labels[i], L.tick_size, Anchor::kEnd, kInk, true);
    for (std::size_t j = 0; j < n && j < m.cells[i].size(); ++j) {
      const double v = m.cells[i][j];
      const double t = max > 0 ? v / max : 0.0;
      const auto mix = [t](unsigned char a) {
        return static_cast<unsigned char>(std::lround(255 - (255 - a) * t));
      };
      c.rect(x0 + cell * j, y0 + cell * i, cell, cell, Color{mix(hot.r), mix(hot.g), mix(hot.b)});
      c.frame(x0 + cell * j, y0 + cell * i, cell, cell, Color{0xff, 0xff, 0xff}, 1);
      if (cell >= L.tick_size * 2.2) {
        const std::string label = integral ? fmt::format("{:.0f}", v) : fmt::format("{:.2f}", v);
        c.text({x0 + cell * (j + 0.5), y0 + cell * (i + 0.5) + L.tick_size * 0.35}, label,
               L.tick_size, Anchor::kMiddle, t > 0.6 ? Color{0xff, 0xff, 0xff} : kInk);
      }
    }
  }
}

void draw_intervals(Canvas& c, const Layout& L, const PlotSpec& spec) {
  Range xr;
  xr.add(static_cast<double>(spec.selection.from.unix_seconds()));
  xr.add(static_cast<double>(spec.selection.to.unix_seconds()));
  for (const auto& s : spec.series) {
    for (const auto& iv : std::get<IntervalPayload>(s.payload).intervals) {
      xr.add(static_cast<double>(iv.end.unix_seconds()));
    }
  }
  if (xr.hi - xr.lo < 1) xr.hi = xr.lo + 1;
  const std::size_t rows = std::max<std::size_t>(1, spec.series.size());
  const double row = (L.bottom - L.top) / static_cast<double>(rows);
  c.line({L.left, L.bottom}, {L.right, L.bottom}, kAxis, 1.5);
  c.line({L.left, L.top}, {L.left, L.bottom}, kAxis, 1.5);
  for (int k = 0; k <= 6; ++k) {
    const double v = xr.lo + (xr.hi - xr.lo) * k / 6.0;
    const double x = L.sx(v, xr);
    c.line({x, L.top}, {x, L.bottom}, kGrid, 1);
    x_tick_label(c, L, x, Timestamp::from_unix(static_cast<std::int64_t>(v)).date(), false);
  }
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    const Color col = series_color(s.name, i);
    const double y = L.top + row * i;
    c.text({L.left - L.tick_size * 0.5, y + row / 2 + L.tick_size * 0.35}, s.name, L.tick_size,
           Anchor::kEnd, kInk);
    for (const auto& iv : std::get<IntervalPayload>(s.payload).intervals) {
      const double a = L.sx(static_cast<double>(iv.start.unix_seconds()), xr);
      const double b = L.sx(static_cast<double>(iv.end.unix_seconds()), xr);
      // Short outages still get a visible sliver.
      c.rect(a, y + row * 0.2, std::max(2.0, b - a), row * 0.6, col);
    }
  }
}

}  // namespace

RenderedPlot render(const PlotSpec& spec, ImageFormat format, int width, int height) {
  if (width < 100 || height < 100) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("image size {}x{} is below 100 px", width, height));
  }
  auto canvas = format == ImageFormat::kPng ? draw::make_raster_canvas(width, height)
                                            : draw::make_svg_canvas(width, height);
  Layout L(width, height);
  // The interval chart labels its rows in the left margin.
  if (spec.kind == PlotKind::kIncidentOutageTimeline) L.left = std::max(L.left, width * 0.15);
  draw_chrome(*canvas, L, spec);
  const SeriesPayload* first = spec.series.empty() ? nullptr : &spec.series.front().payload;
  if (first == nullptr || std::holds_alternative<StepPayload>(*first) ||
      std::holds_alternative<LinePayload>(*first)) {
    draw_xy(*canvas, L, spec);
  } else if (std::holds_alternative<BarPayload>(*first)) {
    draw_bars(*canvas, L, spec);
  } else if (std::holds_alternative<BoxPayload>(*first)) {
    draw_boxes(*canvas, L, spec);
  } else if (std::holds_alternative<MatrixPayload>(*first)) {
    draw_matrix(*canvas, L, spec);
  } else {
    draw_intervals(*canvas, L, spec);
  }
  draw_legend(*canvas, L, spec);

  RenderedPlot out;
  out.kind = spec.kind;
  out.format = format;
  out.width = width;
  out.height = height;
  out.bytes = canvas->finish();
  if (out.bytes.empty()) throw Error(ErrorCode::kRenderFailure, "renderer produced no bytes");
  return out;
}

RenderBatch render_all(const IncidentDataset& dataset, const AnalysisSelection& sel,
                       const std::vector<PlotKind>& kinds, ImageFormat format,
                       const Registry& registry, int width, int height) {
  if (kinds.empty()) throw Error(ErrorCode::kPrecondition, "no plot kinds requested");
  RenderBatch batch;
  for (PlotKind kind : kinds) {
    try {
      PlotSpec spec = build_plot_spec(kind, dataset, sel, registry);
      batch.plots[kind] = render(spec, format, width, height);
      batch.specs[kind] = std::move(spec);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientData) throw;
      batch.skipped[kind] = e.what();
    }
  }
  return batch;
}

}  // namespace fails
