#include <random>

#include <benchmark/benchmark.h>

#include "hmmdual/gramian.hpp"
#include "hmmdual/model.hpp"
#include "hmmdual/simulate.hpp"
#include "hmmdual/subspace.hpp"

namespace {

hmmdual::FiniteHMM bench_model(int d, int m) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  hmmdual::FiniteHMM model;
  model.d = d;
  model.m = m;
  model.A.resize(d, d);
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      model.A(i, j) = unif(rng);
      off += model.A(i, j);
    }
    model.A(i, i) = -off;
  }
  model.H.resize(d, m);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < m; ++j) model.H(i, j) = sym(rng);
  }
  return hmmdual::validate(model);
}

void BM_PropagatorPath(benchmark::State& state) {
  const hmmdual::FiniteHMM model = bench_model(static_cast<int>(state.range(0)), 1);
  hmmdual::SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  const hmmdual::PropagatorEngine engine(model, cfg);
  std::int64_t p = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.path(p++));
  }
}
BENCHMARK(BM_PropagatorPath)->Arg(2)->Arg(5)->Arg(16);

void BM_EstimateGramian(benchmark::State& state) {
  const hmmdual::FiniteHMM model = bench_model(static_cast<int>(state.range(0)), 1);
  hmmdual::SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 5e-3;
  cfg.n_paths = 256;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmmdual::estimate_gramian(model, cfg));
  }
}
BENCHMARK(BM_EstimateGramian)->Arg(3)->Arg(6);

void BM_ControllableSubspace(benchmark::State& state) {
  const hmmdual::FiniteHMM model =
      bench_model(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmmdual::controllable_subspace(model));
  }
}
BENCHMARK(BM_ControllableSubspace)->Arg(8)->Arg(32)->Arg(64);

void BM_KolmogorovForward(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const hmmdual::FiniteHMM model = bench_model(d, 1);
  const hmmdual::SignedMeasureVector mu =
      hmmdual::make_signed_measure(Eigen::VectorXd::Constant(d, 1.0 / d));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmmdual::kolmogorov_forward(model, mu, 2.0));
  }
}
BENCHMARK(BM_KolmogorovForward)->Arg(8)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
