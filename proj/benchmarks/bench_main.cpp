#include <benchmark/benchmark.h>

#include <cmath>

#include "relosc/floquet.hpp"
#include "relosc/ode.hpp"
#include "relosc/potential.hpp"
#include "relosc/spectral.hpp"

using namespace relosc;

namespace {

Potential bench_potential(double b) {
  Potential::TrigComponent c0, c1, c3;
  c0.cst = 0.2;
  c0.cos_coef = {0.4};
  c3.cst = 1.0;
  c3.sin_coef = {0.3};
  return Potential::trig_periodic(Interval{0.0, b, false}, 1.0, c0, c1, c3);
}

void BM_IntegrateDirac(benchmark::State& state) {
  const double len = static_cast<double>(state.range(0));
  const Potential P = bench_potential(len);
  for (auto _ : state) {
    Trajectory t = integrate_dirac(P, 1.7, 0.0, Vec2{0, 1}, len);
    benchmark::DoNotOptimize(t.theta.back());
  }
}
BENCHMARK(BM_IntegrateDirac)->Arg(10)->Arg(100);

void BM_PruferTransport(benchmark::State& state) {
  const double len = static_cast<double>(state.range(0));
  const Potential P = bench_potential(len);
  for (auto _ : state) {
    benchmark::DoNotOptimize(prufer_theta_end(P, 1.7, 0.0, 0.3, len));
  }
}
BENCHMARK(BM_PruferTransport)->Arg(10)->Arg(100)->Arg(1000);

void BM_EigenvaluesRegular(benchmark::State& state) {
  const Potential P = bench_potential(5.0);
  const OperatorSpec H{P, Interval{0, 5, false}, BoundarySpec::normalized(0.3, 2.0)};
  for (auto _ : state) {
    auto evs = eigenvalues_regular(H, -3.0, 3.0);
    benchmark::DoNotOptimize(evs.size());
  }
}
BENCHMARK(BM_EigenvaluesRegular);

void BM_Monodromy(benchmark::State& state) {
  const Potential P = bench_potential(1e6);
  double lam = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(monodromy(P, 1.0 + 0.001 * (lam += 1.0)).discriminant);
  }
}
BENCHMARK(BM_Monodromy);

void BM_ScalarProbe(benchmark::State& state) {
  ProbeOptions opts;
  opts.x_max = 1e10;
  for (auto _ : state) {
    auto r = scalar_boundedness_probe([](double x) { return -0.5 / (x * x); }, 0,
                                      10.0, opts);
    benchmark::DoNotOptimize(r.classification);
  }
}
BENCHMARK(BM_ScalarProbe);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
