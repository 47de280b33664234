#include <benchmark/benchmark.h>

#include "voterperc/measure.hpp"
#include "voterperc/percolation.hpp"
#include "voterperc/renorm.hpp"
#include "voterperc/threshold.hpp"
#include "voterperc/walks.hpp"

using namespace voterperc;

namespace {

void BM_SampleMu(benchmark::State& state) {
  const auto window = linf_box(Point::zero(3), static_cast<int>(state.range(0)));
  const auto policy = StoppingPolicy::at_time(50.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_mu(window, 0.5, static_cast<int>(state.range(1)), policy, seed++));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(window.cardinality()));
}
BENCHMARK(BM_SampleMu)->Args({4, 1})->Args({8, 1})->Args({8, 8})->Unit(benchmark::kMillisecond);

void BM_PairWalk(benchmark::State& state) {
  const auto kernel = std::make_shared<const JumpKernel>(3, 1);
  TruncationPolicy policy;
  const Point x = Point::zero(3);
  const Point y{static_cast<int>(state.range(0)), 0, 0};
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_pair(x, y, kernel, policy, rng));
}
BENCHMARK(BM_PairWalk)->Arg(2)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_LabelClusters(benchmark::State& state) {
  const auto xi = sample_bernoulli(linf_box(Point::zero(3), static_cast<int>(state.range(0))), 0.3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(label_clusters(xi, Adjacency::kNearest));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xi.size()));
}
BENCHMARK(BM_LabelClusters)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_CriticalAlpha(benchmark::State& state) {
  const auto a = AnnulusSpec::from_box(3, state.range(0));
  const auto sampler = bernoulli_threshold_sampler(a);
  const auto s = sampler.coupled(1);
  for (auto _ : state) benchmark::DoNotOptimize(critical_alpha(s, a));
}
BENCHMARK(BM_CriticalAlpha)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_PairSum(benchmark::State& state) {
  Rng rng(3);
  PairSumEvaluator eval(3, 2);
  const auto T = random_embedding(static_cast<int>(state.range(0)), 3, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(eval.pair_sum(T));
}
BENCHMARK(BM_PairSum)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
