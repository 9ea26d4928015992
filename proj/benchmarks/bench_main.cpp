#include <benchmark/benchmark.h>

#include "qgbec/constants.hpp"
#include "qgbec/cube_potential.hpp"
#include "qgbec/experiment.hpp"
#include "qgbec/special.hpp"
#include "qgbec/thermo.hpp"

namespace {

using namespace qgbec;

const units::Species& yb() { return units::lookup_species("Yb-174"); }

void BM_ReErfComplex(benchmark::State& state) {
  double x = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(special::re_erf_complex(x, 2.7));
    x = x < 5.0 ? x + 0.01 : 0.3;
  }
}
BENCHMARK(BM_ReErfComplex);

void BM_Oracle1d(benchmark::State& state) {
  const cube::ModeIndex mode{static_cast<int>(state.range(0)), 0, 0};
  for (auto _ : state) benchmark::DoNotOptimize(cube::gk_oracle_1d(mode, yb().mass_kg, 0.01, 1e-10));
}
BENCHMARK(BM_Oracle1d)->Arg(1)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_Oracle3d(benchmark::State& state) {
  const cube::Oracle3dOptions o{.grid = static_cast<int>(state.range(0)), .order = 2};
  for (auto _ : state) benchmark::DoNotOptimize(cube::gk_oracle_3d(cube::ModeIndex{1, 0, 0}, yb().mass_kg, 0.01, o));
}
BENCHMARK(BM_Oracle3d)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HeatCapacity(benchmark::State& state) {
  const units::GasParameters p(yb(), 1e16, 0.01, 0.0);
  const auto theory = state.range(0) ? spectrum::GravityTheory::Quantum : spectrum::GravityTheory::Classical;
  for (auto _ : state) benchmark::DoNotOptimize(thermo::heat_capacity(p, theory, 1e-14).c_v);
}
BENCHMARK(BM_HeatCapacity)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Reconcile(benchmark::State& state) {
  const units::GasParameters p(yb(), 1e16, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(experiment::reconcile_cv_target(p, 1e-14, 3.164).g_em);
}
BENCHMARK(BM_Reconcile)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
