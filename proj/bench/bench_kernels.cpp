// Information-density batch kernels: explicit-matrix serial reference
// against the fast path, serial and with OpenMP workers; plus one OSD decode.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "fbl/info_density.hpp"
#include "fbl/link_sim.hpp"

namespace {

fbl::SystemConfig bench_config(int n_tx, int n_rx) {
  fbl::SystemConfig c;
  c.n_tx = n_tx;
  c.n_rx = n_rx;
  c.n_res = 4;
  c.n_ofdm = 2;
  c.n_subc = 12;
  c.link = fbl::Link::uplink;
  c.snr_db = 20.0;
  return c;
}

constexpr std::size_t kDraws = 2000;

void run_batch(benchmark::State& state, bool reference, int threads) {
  const auto cfg = bench_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  fbl::BatchOptions opts;
  opts.reference = reference;
  opts.threads = threads;
  for (auto _ : state) {
    auto b = fbl::sample_sum_batch(cfg, kDraws, 1, opts);
    benchmark::DoNotOptimize(b.values.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kDraws * cfg.n_res));
}

void BM_BatchReference(benchmark::State& s) { run_batch(s, true, 1); }
void BM_BatchFastSerial(benchmark::State& s) { run_batch(s, false, 1); }
void BM_BatchFastParallel(benchmark::State& s) { run_batch(s, false, omp_get_max_threads()); }

#define SHAPES Args({1, 2})->Args({2, 2})->Args({2, 1})->Unit(benchmark::kMillisecond)
BENCHMARK(BM_BatchReference)->SHAPES;
BENCHMARK(BM_BatchFastSerial)->SHAPES;
BENCHMARK(BM_BatchFastParallel)->SHAPES;

void BM_OsdOrder3(benchmark::State& state) {
  const fbl::LinkSimulator sim(fbl::CodeSpec{}, 3);
  auto cfg = bench_config(1, 2);
  cfg.n_res = 8;
  cfg.snr_db = static_cast<double>(state.range(0));
  const auto layout = fbl::make_layout(cfg, 6, sim.spec());
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.run_packet(cfg, layout, 1, i++));
}
BENCHMARK(BM_OsdOrder3)->Arg(20)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
