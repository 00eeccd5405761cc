// Serial reference kernels against the OpenMP paths. Thread count comes from
// VANHOVE_THREADS (or the OpenMP default); run with several values to compare.

#include <benchmark/benchmark.h>

#include <cmath>

#include "vanhove/evolution.hpp"
#include "vanhove/parallel.hpp"
#include "vanhove/reference.hpp"
#include "vanhove/rng.hpp"
#include "vanhove/wigner.hpp"

using namespace vanhove;

namespace {

StateFunctional make_state(const GridPtr& g) {
  CounterRng rng(1);
  std::vector<complex> s(g->size());
  double mass = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    mass += g->weight(i) * s[i].real();
  }
  for (auto& x : s) x /= mass;
  return StateFunctional(SingularKernel(g, std::move(s)),
                         RegularKernel(g, random_hermitian(rng, static_cast<Eigen::Index>(g->size())) * 0.01));
}

Observable make_observable(const GridPtr& g) {
  CounterRng rng(2);
  return Observable(hamiltonian_observable(g).singular(),
                    RegularKernel(g, random_hermitian(rng, static_cast<Eigen::Index>(g->size()))));
}

void apply_threads() {
  if (const int n = threads_from_environment(); n > 0) set_thread_count(n);
}

void BM_pair_reference(benchmark::State& st) {
  const auto g = make_grid(10.0, static_cast<std::size_t>(st.range(0)), QuadratureScheme::uniform);
  const auto rho = make_state(g);
  const auto obs = make_observable(g);
  for (auto _ : st) benchmark::DoNotOptimize(reference::pair(rho, obs));
}

void BM_pair_parallel(benchmark::State& st) {
  apply_threads();
  const auto g = make_grid(10.0, static_cast<std::size_t>(st.range(0)), QuadratureScheme::uniform);
  const auto rho = make_state(g);
  const auto obs = make_observable(g);
  for (auto _ : st) benchmark::DoNotOptimize(pair(rho, obs));
}

void BM_expectation_reference(benchmark::State& st) {
  const auto g = make_grid(10.0, static_cast<std::size_t>(st.range(0)), QuadratureScheme::uniform);
  const auto rho = make_state(g);
  const auto obs = make_observable(g);
  double t = 0.0;
  for (auto _ : st) benchmark::DoNotOptimize(reference::expectation(rho, obs, t += 0.1));
}

void BM_expectation_series(benchmark::State& st) {
  apply_threads();
  const auto g = make_grid(10.0, static_cast<std::size_t>(st.range(0)), QuadratureScheme::uniform);
  const ExpectationSeries series(make_state(g), make_observable(g));
  std::vector<double> times(32);
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = 0.1 * static_cast<double>(k);
  for (auto _ : st) benchmark::DoNotOptimize(series.real_at(times));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(times.size()));
}

void BM_density_reference(benchmark::State& st) {
  const auto eg = make_grid(10.0, 401, QuadratureScheme::uniform);
  const PhaseGrid pg(-4, 4, static_cast<std::size_t>(st.range(0)), -4, 4, static_cast<std::size_t>(st.range(0)));
  const PhaseField h = harmonic_hamiltonian(pg);
  const auto rho = make_state(eg).singular();
  for (auto _ : st) benchmark::DoNotOptimize(reference::classical_state_density(rho, h, MollifierPolicy{0.6}));
}

void BM_density_parallel(benchmark::State& st) {
  apply_threads();
  const auto eg = make_grid(10.0, 401, QuadratureScheme::uniform);
  const PhaseGrid pg(-4, 4, static_cast<std::size_t>(st.range(0)), -4, 4, static_cast<std::size_t>(st.range(0)));
  const PhaseField h = harmonic_hamiltonian(pg);
  const auto rho = make_state(eg).singular();
  for (auto _ : st) benchmark::DoNotOptimize(classical_state_density(rho, h, MollifierPolicy{0.6}));
}

}  // namespace

BENCHMARK(BM_pair_reference)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_pair_parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_expectation_reference)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_expectation_series)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_density_reference)->Arg(81)->Arg(161)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_density_parallel)->Arg(81)->Arg(161)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
