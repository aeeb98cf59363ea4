#include <benchmark/benchmark.h>

#include "etalab/fixtures.hpp"

using namespace etalab;

namespace {

void BM_quadrature(benchmark::State& state) {
  auto grid = suspend::TauGrid::make((int)state.range(0));
  std::vector<Complex> f(grid->n());
  for (int j = 0; j < grid->n(); ++j) {
    const double t = grid->node(j);
    f[j] = std::exp(-t * t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(grid->quadrature(f));
}
BENCHMARK(BM_quadrature)->Arg(64)->Arg(128)->Arg(256);

void BM_star_multiply(benchmark::State& state) {
  const int n = (int)state.range(0);
  Rng rng(1, "bench-star");
  auto g = adiabatic::BiGrid::make(n, n);
  auto a = fixtures::random_schwartz_eps(g, 2, rng);
  auto b = fixtures::random_schwartz_eps(g, 2, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(adiabatic::star_multiply(a, b));
}
BENCHMARK(BM_star_multiply)->Arg(32)->Arg(48)->Arg(64);

void BM_ch_odd(benchmark::State& state) {
  const int n = (int)state.range(0);
  Rng rng(2, "bench-chodd");
  chern::ParamDomain dom{{chern::Axis{n}, chern::Axis{n}, chern::Axis{n}}};
  auto f = fixtures::random_group_family(dom, 2, rng, 0.25, 0);
  for (auto _ : state) benchmark::DoNotOptimize(chern::ch_odd(f));
}
BENCHMARK(BM_ch_odd)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_regularized_trace(benchmark::State& state) {
  auto cfg = eta::RegularizedTraceConfig::defaults();
  auto F = [](double t) { return Complex(1.0 / (1.0 + t * t)); };
  for (auto _ : state)
    benchmark::DoNotOptimize(eta::regularized_trace(F, cfg));
}
BENCHMARK(BM_regularized_trace);

}  // namespace

BENCHMARK_MAIN();
