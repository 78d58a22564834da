#include <benchmark/benchmark.h>

#include <memory>

#include "minexp/multivar.hpp"
#include "minexp/oracle.hpp"
#include "minexp/prony.hpp"

using namespace minexp;

namespace {

ExponentialModel model_for(const DirectionBasis& b, std::size_t n) {
  return generate_admissible_model(b, n, 1234 + n);
}

void BM_FitNodes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto b = DirectionBasis::standard(1);
  const auto m = model_for(b, n);
  std::vector<Complex> f;
  for (std::size_t s = 0; s < 2 * n; ++s) f.push_back(evaluate(m, Point{static_cast<double>(s)}));
  for (auto _ : state) benchmark::DoNotOptimize(fit_nodes(f, n));
}
BENCHMARK(BM_FitNodes)->RangeMultiplier(2)->Range(2, 32);

void BM_RecoverKnownN(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto b = DirectionBasis::standard(d);
  const auto m = model_for(b, n);
  auto source = std::make_shared<SyntheticSource>(m);
  for (auto _ : state) {
    Oracle o(source);
    benchmark::DoNotOptimize(recover_known_n(o, b, n));
  }
}
BENCHMARK(BM_RecoverKnownN)->ArgsProduct({{2, 4, 8}, {4, 8, 16}});

void BM_RecoverUnknownN(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto b = DirectionBasis::standard(d);
  const auto m = model_for(b, n);
  auto source = std::make_shared<SyntheticSource>(m);
  for (auto _ : state) {
    Oracle o(source);
    benchmark::DoNotOptimize(recover_unknown_n(o, b));
  }
}
BENCHMARK(BM_RecoverUnknownN)->Args({2, 4})->Args({4, 4})->Args({8, 4})->Args({2, 8})->Args({4, 8})->Args({8, 8})->Args({4, 16});

}  // namespace

BENCHMARK_MAIN();
