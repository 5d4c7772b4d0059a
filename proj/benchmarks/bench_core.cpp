#include <benchmark/benchmark.h>

#include "mmdim/bowen.hpp"
#include "mmdim/caratheodory.hpp"
#include "mmdim/measure.hpp"
#include "mmdim/pressure.hpp"

using namespace mmdim;

namespace {

SystemModel binary() {
  SystemParams p;
  p.k = 2;
  p.window = 16;
  p.eps_min = 0.1;
  return SystemModel(p);
}

SystemModel grid(int k, double eps) {
  SystemParams p;
  p.kind = ShiftKind::grid;
  p.k = k;
  p.sidedness = Sidedness::two_sided;
  p.window = 16;
  p.symbol_metric = SymbolMetric::abs_diff;
  p.eps_min = eps;
  return SystemModel(p);
}

void BM_BowenDistance(benchmark::State& st) {
  const SystemModel s = grid(16, 1.0 / 16);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  Rng rng(1);
  const PointWindow x = mu.sample(rng), y = mu.sample(rng);
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(bowen_distance(s, x, y, n));
}
BENCHMARK(BM_BowenDistance)->Arg(1)->Arg(4)->Arg(8);

void BM_MaxSeparatedExact(benchmark::State& st) {
  const SystemModel s = binary();
  const PointSet z = s.enumerate_points(4);
  for (auto _ : st) benchmark::DoNotOptimize(max_separated(s, z, 3, 0.3, SearchMode::exact).indices.size());
}
BENCHMARK(BM_MaxSeparatedExact);

void BM_MaxSeparatedGreedy(benchmark::State& st) {
  const SystemModel s = binary();
  const PointSet z = s.enumerate_points(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(max_separated(s, z, 3, 0.3, SearchMode::greedy).indices.size());
  st.SetComplexityN(static_cast<long>(z.size()));
}
BENCHMARK(BM_MaxSeparatedGreedy)->RangeMultiplier(2)->Range(4, 10)->Complexity();

void BM_PressureOracle(benchmark::State& st) {
  const double eps = 1.0 / 64;
  const SystemModel s = grid(64, eps);
  PressureOptions po;
  po.source = PressureSource::oracle;
  for (auto _ : st) benchmark::DoNotOptimize(pressure_record(s, Potential::constant(0.0), 8, eps, po).log_sum);
}
BENCHMARK(BM_PressureOracle);

void BM_CoverValue(benchmark::State& st) {
  OuterMeasureProblem p{binary()};
  p.z = p.sys.enumerate_points(3);
  p.lambda = 0.5;
  p.N = 1;
  p.n_max = 2;
  p.eps = 0.3;
  for (auto _ : st) benchmark::DoNotOptimize(cover_value(p).value);
}
BENCHMARK(BM_CoverValue);

void BM_ImportanceMass(benchmark::State& st) {
  const double eps = 1.0 / 16;
  const SystemModel s = grid(16, eps);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  Rng rng(2);
  const PointWindow x = mu.sample(rng);
  MassOptions opt;
  opt.method = MassMethod::importance;
  opt.samples = 10000;
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(estimate_ball_mass(mu, x, n, eps, opt, 3).value);
  st.SetItemsProcessed(st.iterations() * static_cast<long>(opt.samples));
}
BENCHMARK(BM_ImportanceMass)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_KatokBinary(benchmark::State& st) {
  SystemParams p;
  p.k = 2;
  p.window = 12;
  p.eps_min = 0.1;
  const MeasureModel mu = MeasureModel::bernoulli(SystemModel(p), {0.3, 0.7});
  for (auto _ : st) benchmark::DoNotOptimize(katok_rn(mu, 6, 0.3, 0.5, {}).count);
}
BENCHMARK(BM_KatokBinary)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
