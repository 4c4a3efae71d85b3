#include <random>

#include <benchmark/benchmark.h>

#include "frechet/estimators.hpp"
#include "frechet/numeric.hpp"
#include "frechet/simgen.hpp"

namespace {

using namespace frechet;

void BM_Isotonic(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Vector v(state.range(0));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i) + nd(rng);
  for (auto _ : state) benchmark::DoNotOptimize(isotonic_regression(v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Isotonic)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_SpdClip(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const int d = static_cast<int>(state.range(0));
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = nd(rng);
  a = (0.5 * (a + a.transpose())).eval();
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig_clip(a, 1e-8));
}
BENCHMARK(BM_SpdClip)->Arg(3)->Arg(10)->Arg(30);

ReplicationData replication(int n) {
  SimulationSpec spec = SimulationSpec::defaults(ModelId::m1_2, 2);
  spec.n = n;
  return generate_replication(spec, 42);
}

void BM_FitLfr(benchmark::State& state) {
  const ReplicationData rep = replication(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_lfr(rep.train));
}
BENCHMARK(BM_FitLfr)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_FitNlfr(benchmark::State& state) {
  SimulationSpec spec = SimulationSpec::defaults(ModelId::m1_2, 2);
  spec.n = static_cast<int>(state.range(0));
  const ReplicationData rep = generate_replication(spec, 42);
  const DerivedLinks links = derive_sample_links(spec, rep.train.X);
  for (auto _ : state) benchmark::DoNotOptimize(fit_nlfr_profile(rep.train, links.general));
}
BENCHMARK(BM_FitNlfr)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_FitSnlfr(benchmark::State& state) {
  SimulationSpec spec = SimulationSpec::defaults(ModelId::m1_2, 2);
  spec.n = static_cast<int>(state.range(0));
  const ReplicationData rep = generate_replication(spec, 42);
  const DerivedLinks links = derive_sample_links(spec, rep.train.X);
  const std::vector<double> grid = CGrid{}.values();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_snlfr(rep.train, *links.generalized_linear, default_h(rep.train.space), grid));
  }
}
BENCHMARK(BM_FitSnlfr)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_PredictMany(benchmark::State& state) {
  const ReplicationData rep = replication(500);
  const FittedModel model = fit_lfr(rep.train);
  for (auto _ : state) benchmark::DoNotOptimize(predict_many(model, rep.test.X));
  state.SetItemsProcessed(state.iterations() * rep.test.X.rows());
}
BENCHMARK(BM_PredictMany)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
