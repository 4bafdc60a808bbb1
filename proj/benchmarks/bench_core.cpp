#include <benchmark/benchmark.h>

#include "fails/analytics.hpp"
#include "fails/ingest.hpp"
#include "fails/plot.hpp"
#include "fails/store.hpp"

using namespace fails;

namespace {

const IncidentDataset& fixture_dataset() {
  static const IncidentDataset d = [] {
    ScrapeConfig cfg;
    cfg.fixture_dir = FAILS_FIXTURE_DIR;
    return run_pipeline(cfg).dataset;
  }();
  return d;
}

// The fixture corpus repeated with shifted starts, so the size scales.
IncidentDataset scaled_dataset(int copies) {
  IncidentDataset out = fixture_dataset();
  out.records.clear();
  for (int c = 0; c < copies; ++c) {
    for (auto r : fixture_dataset().records) {
      const Seconds shift = kDay * (90 * c);
      r.incident_id += "-" + std::to_string(c);
      r.start = r.start + shift;
      if (r.end) *r.end = *r.end + shift;
      for (RecoveryStage s : kAllStages) {
        if (auto& t = r.stage_time(s)) *t = *t + shift;
      }
      for (auto& u : r.updates) u.at = u.at + shift;
      out.records.push_back(std::move(r));
    }
  }
  out.scraped_at = out.scraped_at + kDay * (90 * copies);
  out.sort_records();
  return out;
}

void BM_FixturePipeline(benchmark::State& state) {
  ScrapeConfig cfg;
  cfg.fixture_dir = FAILS_FIXTURE_DIR;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(cfg));
}
BENCHMARK(BM_FixturePipeline)->Unit(benchmark::kMillisecond);

void BM_CsvRoundTrip(benchmark::State& state) {
  const IncidentDataset d = scaled_dataset(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_records(serialize_records(d)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.records.size()));
}
BENCHMARK(BM_CsvRoundTrip)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_PlotSpec(benchmark::State& state) {
  const IncidentDataset d = scaled_dataset(static_cast<int>(state.range(1)));
  const AnalysisSelection sel = full_selection(d, builtin_registry());
  const PlotKind kind = all_plot_kinds()[static_cast<std::size_t>(state.range(0))];
  state.SetLabel(std::string(plot_kind_name(kind)));
  for (auto _ : state) benchmark::DoNotOptimize(build_plot_spec(kind, d, sel));
}
BENCHMARK(BM_PlotSpec)
    ->ArgsProduct({benchmark::CreateDenseRange(0, kPlotKindCount - 1, 1), {1, 10}})
    ->Unit(benchmark::kMicrosecond);

void BM_Render(benchmark::State& state) {
  const IncidentDataset& d = fixture_dataset();
  const PlotSpec spec =
      build_plot_spec(PlotKind::kServiceCooccurrence, d, full_selection(d, builtin_registry()));
  const auto format = state.range(0) == 0 ? ImageFormat::kSvg : ImageFormat::kPng;
  for (auto _ : state) benchmark::DoNotOptimize(render(spec, format));
}
BENCHMARK(BM_Render)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
