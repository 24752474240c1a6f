#include <benchmark/benchmark.h>

#include <random>

#include "qrefine/enhancers.hpp"
#include "qrefine/filters.hpp"
#include "qrefine/iqa.hpp"
#include "qrefine/quality_field.hpp"
#include "qrefine/stages.hpp"
#include "qrefine/synthetic.hpp"

namespace {

using namespace qrefine;

QualityMap random_map(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> s(static_cast<std::size_t>(n) * n);
  for (auto& v : s) v = u(rng);
  return QualityMap(n, s);
}

void BM_FlattenBicubic(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto map = random_map(8);
  for (auto _ : state) benchmark::DoNotOptimize(flatten_bicubic(map, side, side));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_FlattenBicubic)->Arg(256)->Arg(1024);

void BM_ScoreCells(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = synthesize_clean(3, side);
  const ScorerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(score_cells(img, cfg));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_ScoreCells)->Arg(256)->Arg(1024);

void BM_HarmonicInpaint(benchmark::State& state) {
  const int hole = static_cast<int>(state.range(0));
  const auto img = synthesize_clean(4, 256);
  PixelMap mask(256, 256);
  for (int y = 64; y < 64 + hole; ++y)
    for (int x = 64; x < 64 + hole; ++x) mask.at(y, x) = 1.0f;
  for (auto _ : state) benchmark::DoNotOptimize(builtin_harmonic_inpaint(img, mask));
}
BENCHMARK(BM_HarmonicInpaint)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BlindEnhance(benchmark::State& state) {
  const auto img = synthesize_clean(5, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(builtin_blind_enhance(img));
}
BENCHMARK(BM_BlindEnhance)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FullPipeline(benchmark::State& state) {
  const auto img = synthesize_clean(6, 256);
  const BuiltinBackend backend;
  const RefineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(img, "a photo", cfg, backend));
}
BENCHMARK(BM_FullPipeline)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
