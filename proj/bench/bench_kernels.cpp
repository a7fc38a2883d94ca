// Serial reference vs OpenMP kernels on the default benchmark shapes.
//
//   bench_kernels --benchmark_filter=Gradient

#include <benchmark/benchmark.h>

#include <numeric>

#include "dldl/kernels.hpp"

using namespace dldl;

namespace {

struct Fixture {
  Dataset data;
  Model model;
  std::vector<std::size_t> indices;
};

const Fixture &fixture(HeadKind kind) {
  static std::vector<std::pair<HeadKind, Fixture>> cache;
  for (const auto &[k, f] : cache)
    if (k == kind)
      return f;
  const LabelSpace space = make_label_space(0, 100, 1);
  SynthConfig cfg;
  Fixture f;
  f.data = gen_synthetic(cfg, space);
  f.model = make_model(kind, space, std::vector<std::size_t>{16, 64, 64}, 1.0, 2.0, 1);
  f.indices.resize(f.data.size());
  std::iota(f.indices.begin(), f.indices.end(), 0);
  cache.emplace_back(kind, std::move(f));
  return cache.back().second;
}

void batch_span(benchmark::State &state, const Fixture &f, std::span<const std::size_t> &out) {
  out = std::span<const std::size_t>(f.indices).first(static_cast<std::size_t>(state.range(0)));
}

void BM_GradientSerial(benchmark::State &state) {
  const Fixture &f = fixture(static_cast<HeadKind>(state.range(1)));
  std::span<const std::size_t> batch;
  batch_span(state, f, batch);
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_gradient_serial(f.model, f.data, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradientParallel(benchmark::State &state) {
  const Fixture &f = fixture(static_cast<HeadKind>(state.range(1)));
  std::span<const std::size_t> batch;
  batch_span(state, f, batch);
  GradientScratch scratch;
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_gradient_parallel(f.model, f.data, batch, scratch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PredictSerial(benchmark::State &state) {
  const Fixture &f = fixture(HeadKind::joint);
  for (auto _ : state)
    benchmark::DoNotOptimize(predict_serial(f.model, f.data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_PredictParallel(benchmark::State &state) {
  const Fixture &f = fixture(HeadKind::joint);
  for (auto _ : state)
    benchmark::DoNotOptimize(predict_parallel(f.model, f.data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void gradient_args(benchmark::internal::Benchmark *b) {
  for (HeadKind k : {HeadKind::joint, HeadKind::mr_l2, HeadKind::ranking})
    for (int batch : {64, 512, 2000})
      b->Args({batch, static_cast<int>(k)});
  b->ArgNames({"batch", "head"});
}

} // namespace

BENCHMARK(BM_GradientSerial)->Apply(gradient_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientParallel)->Apply(gradient_args)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PredictParallel)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
