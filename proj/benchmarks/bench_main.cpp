#include <benchmark/benchmark.h>

#include "oblsamp/dataset.hpp"
#include "oblsamp/prp.hpp"
#include "oblsamp/rng.hpp"
#include "oblsamp/sampling.hpp"

using namespace oblsamp;

namespace {

const Seed kSeed = Seed::from_bytes(Bytes{'b', 'e', 'n', 'c', 'h'});

void BM_SealRecord(benchmark::State& state) {
  SecretKey key = SecretKey::derive(kSeed, "enc");
  Record r{true, 7, Bytes(static_cast<std::size_t>(state.range(0)), 0xab)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(encrypt_record(r, key));
  }
}
BENCHMARK(BM_SealRecord)->Arg(16)->Arg(256);

void BM_PrpEvaluate(benchmark::State& state) {
  Prp prp(kSeed, static_cast<std::uint64_t>(state.range(0)));
  std::uint64_t j = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prp.evaluate(j));
    j = j % prp.domain() + 1;
  }
}
BENCHMARK(BM_PrpEvaluate)->Arg(6)->Arg(1024)->Arg(1 << 20);

void BM_BinomialDraw(benchmark::State& state) {
  SeededRng rng(kSeed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(binomial_draw(rng, static_cast<std::uint64_t>(state.range(0)), 0.05));
  }
}
BENCHMARK(BM_BinomialDraw)->Arg(1000)->Arg(100000);

void BM_ObliviousShuffle(benchmark::State& state) {
  const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  SecretKey key = SecretKey::derive(kSeed, "enc");
  Dataset data = make_dataset(n, 16, kSeed);
  ShuffleConfig cfg = ShuffleConfig::for_n(n);
  for (auto _ : state) {
    ExternalMemory mem;
    RegionId region = ingest_dataset(mem, data, key);
    PrivateMemory pm(cfg.capacity());
    SecretPermutation pi(kSeed, n);
    SeededRng rng(kSeed);
    oblivious_shuffle(mem, region, pi, cfg, key, rng, pm);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ObliviousShuffle)->Arg(1024)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_SwoSamples(benchmark::State& state) {
  const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  SecretKey key = SecretKey::derive(kSeed, "enc");
  Dataset data = make_dataset(n, 16, kSeed);
  ShuffleConfig cfg = ShuffleConfig::for_n(n);
  RunSeeds rs = RunSeeds::derive(kSeed);
  for (auto _ : state) {
    ExternalMemory mem;
    RegionId region = ingest_dataset(mem, data, key);
    SwoTemplate t(n, 32, rs.tmpl);
    SecretPermutation pi1(rs.pi1, n), pi2(rs.pi2, n);
    SeededRng rng(rs.shuffle);
    benchmark::DoNotOptimize(samples_swo(mem, region, t, pi1, pi2, cfg, key, rng));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SwoSamples)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_PoissonSamples(benchmark::State& state) {
  const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  SecretKey key = SecretKey::derive(kSeed, "enc");
  Dataset data = make_dataset(n, 16, kSeed);
  ShuffleConfig cfg = ShuffleConfig::for_n(n);
  RunSeeds rs = RunSeeds::derive(kSeed);
  for (auto _ : state) {
    ExternalMemory mem;
    RegionId region = ingest_dataset(mem, data, key);
    PoissonTemplate t(n, 1.0 / 32, 32, rs.tmpl);
    SecretPermutation pi1(rs.pi1, n), pi2(rs.pi2, n);
    SeededRng rng(rs.shuffle);
    benchmark::DoNotOptimize(samples_poisson(mem, region, t, pi1, pi2, cfg, key, rng));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_PoissonSamples)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
