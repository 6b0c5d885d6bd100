#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "strm/connectivity.hpp"
#include "strm/grid.hpp"
#include "strm/laws.hpp"
#include "strm/params.hpp"
#include "strm/rng.hpp"

namespace {

strm::ModelParams critical_plane() {
  return strm::ModelParams::grid(2, 2, strm::OffspringLaw::poisson(4.0));
}

// Poisson sampler throughput across the inversion / rejection split.
void BM_poisson_draw(benchmark::State& state) {
  const double lambda = state.range(0) / 10.0;
  strm::Stream s = strm::Stream::root(1).fork(strm::tag::kStats);
  uint64_t acc = 0;
  for (auto _ : state) acc += strm::poisson_draw(s, lambda);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_poisson_draw)->Arg(8)->Arg(40)->Arg(300);

// One critical level advance, by the aggregated fast path and by the
// per-particle generic path, at a fixed prebuilt state size.
void BM_step(benchmark::State& state) {
  auto params = critical_plane();
  strm::Stream rs = strm::Stream::root(2).fork(strm::tag::kGrid).fork(0);
  // Grow to the requested level once, outside the timed loop.
  auto states = strm::run(params, static_cast<int>(state.range(0)), rs);
  const auto& cur = states.back();
  strm::StepOptions opts;
  opts.force_generic = state.range(1) != 0;
  uint64_t acc = 0;
  for (auto _ : state) {
    auto next = strm::step(cur, params, rs, opts);
    acc += next.total;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(cur.total));
}
BENCHMARK(BM_step)
    ->Args({6, 0})
    ->Args({6, 1})
    ->Args({9, 0})
    ->Args({9, 1});

// Whole fractal percolation run at the connectivity threshold scale.
void BM_run_fractal(benchmark::State& state) {
  strm::Stream base = strm::Stream::root(3).fork(strm::tag::kFractal);
  uint64_t r = 0;
  uint64_t acc = 0;
  for (auto _ : state) {
    auto run = strm::run_fractal(2, 2, 0.7, static_cast<int>(state.range(0)),
                                 base.fork(r++));
    acc += run.states.back().occupied.size();
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_run_fractal)->Arg(8)->Arg(10);

// Union-find crossing detection on a dense occupied set.
void BM_crossing(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  strm::Stream base = strm::Stream::root(4).fork(strm::tag::kFractal);
  auto run = strm::run_fractal(2, 2, 0.95, level, base.fork(7));
  const auto& cells = run.states.back().occupied;
  uint64_t acc = 0;
  for (auto _ : state) {
    auto rep = strm::crossing(cells, level, 2, 2,
                              strm::AdjacencyMode::kFace, 1);
    acc += rep.largest_component;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(cells.size()));
}
BENCHMARK(BM_crossing)->Arg(7)->Arg(9);

// Joint particle/indicator evolution (the containment coupling).
void BM_coupled_run(benchmark::State& state) {
  strm::Stream base = strm::Stream::root(5).fork(strm::tag::kCoupling);
  uint64_t r = 0;
  uint64_t acc = 0;
  for (auto _ : state) {
    auto run =
        strm::coupled_run(2, 2, 1.0, static_cast<int>(state.range(0)),
                          base.fork(r++));
    acc += run.back().strm.total;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_coupled_run)->Arg(6)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
