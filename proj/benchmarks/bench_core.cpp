#include <benchmark/benchmark.h>

#include "kirchhoff/experiments.hpp"
#include "kirchhoff/integrator.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/spectral.hpp"

namespace {

using namespace kirchhoff;

SpectralState random_state(int n_modes) {
  InitialDataSpec data;
  data.random = RandomProfile{42, n_modes, 2.0, 1};
  data.epsilon = 0.3;
  return make_initial_state(data);
}

void BM_Rhs(benchmark::State& state) {
  const auto nl = Nonlinearity::affine_plus(1.0);
  const SpectralState st = random_state(static_cast<int>(state.range(0)));
  std::vector<double> dc, dv;
  for (auto _ : state) {
    rhs(st, nl, dc, dv);
    benchmark::DoNotOptimize(dv.data());
  }
}
BENCHMARK(BM_Rhs)->Arg(16)->Arg(256);

void BM_Observables(benchmark::State& state) {
  const auto nl = Nonlinearity::affine_plus(1.0);
  const SpectralState st = random_state(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto smp = observables(st, nl);
    benchmark::DoNotOptimize(&smp);
  }
}
BENCHMARK(BM_Observables)->Arg(16)->Arg(256);

void BM_Integrate(benchmark::State& state) {
  const auto nl = Nonlinearity::affine_plus(1.0);
  const SpectralState st = random_state(16);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.sample_stride = 0;
  for (auto _ : state) {
    const Trajectory traj = integrate(st, nl, 10.0, cfg);
    benchmark::DoNotOptimize(&traj);
  }
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

void BM_MassInverse(benchmark::State& state) {
  const auto nl = Nonlinearity::power_alpha(1.0);
  const double y = 0.5 * nl.mass_sup();
  for (auto _ : state) {
    benchmark::DoNotOptimize(nl.mass_inverse(y));
  }
}
BENCHMARK(BM_MassInverse)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
