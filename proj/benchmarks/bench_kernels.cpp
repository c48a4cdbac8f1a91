#include <benchmark/benchmark.h>

#include "epislfv/ancestral_sim.hpp"
#include "epislfv/event_stream.hpp"
#include "epislfv/forward_sim.hpp"

using namespace epislfv;

static void BM_EventStream(benchmark::State& state) {
  EventStream stream(EventLaw(2, {{1.0, 4.0, 0.03}}), Region({200, 200}), Rng(1));
  for (auto _ : state) benchmark::DoNotOptimize(stream.next());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EventStream);

static ForwardConfig sweep_like(BoundaryMode mode) {
  ForwardConfig f;
  f.law = EventLaw(2, {{1.0, 4.0, 0.03}});
  f.gamma = 1.0;
  f.region = Region({200, 200}, mode);
  f.init = InitialCondition::epidemic(BallShape{Point{100, 100}, 50.0}, 0.9);
  f.horizon = 1e9;
  return f;
}

static void BM_ForwardStep(benchmark::State& state) {
  const auto mode = state.range(0) ? BoundaryMode::kTruncated : BoundaryMode::kTorus;
  ForwardSimulator sim(sweep_like(mode), {1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(sim.step());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardStep)->Arg(0)->Arg(1);

static void BM_ForwardSweepReplicate(benchmark::State& state) {
  auto f = sweep_like(BoundaryMode::kTorus);
  f.horizon = static_cast<double>(state.range(0));
  std::uint64_t rep = 0;
  for (auto _ : state) {
    ForwardSimulator sim(f, {2, rep++});
    sim.advance_to(f.horizon);
    benchmark::DoNotOptimize(sim.field().running_mass());
  }
}
BENCHMARK(BM_ForwardSweepReplicate)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_CoveredCells(benchmark::State& state) {
  ForwardSimulator sim(sweep_like(BoundaryMode::kTorus), {3, 0});
  Rng rng(4);
  std::vector<std::size_t> cells;
  AugmentedEvent ev;
  ev.r = 4.0;
  for (auto _ : state) {
    ev.z = Point{rng.uniform(0, 200), rng.uniform(0, 200)};
    sim.covered_cells(ev, cells);
    benchmark::DoNotOptimize(cells.data());
  }
}
BENCHMARK(BM_CoveredCells);

static void BM_DualGrowth(benchmark::State& state) {
  const auto cfg = DualConfig::continuous(EventLaw(2, {{1.0, 3.0, 0.1}}), 1.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    AncestralSimulator sim(cfg, {Point{}}, Rng::for_stream({5, rep++}, StreamTag::kDual));
    sim.run_until(static_cast<double>(state.range(0)));
    benchmark::DoNotOptimize(sim.size());
  }
}
BENCHMARK(BM_DualGrowth)->Arg(4)->Unit(benchmark::kMicrosecond);

static void BM_GridDualGrowth(benchmark::State& state) {
  const Grid g(Region({64, 64}), 1.0);
  const auto cfg = DualConfig::grid_matched(EventLaw(2, {{1.0, 3.0, 0.1}}), 1.0, g);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    AncestralSimulator sim(cfg, {Point{32, 32}}, Rng::for_stream({6, rep++}, StreamTag::kDual));
    sim.run_until(static_cast<double>(state.range(0)));
    benchmark::DoNotOptimize(sim.size());
  }
}
BENCHMARK(BM_GridDualGrowth)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
