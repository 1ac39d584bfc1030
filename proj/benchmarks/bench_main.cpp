#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "gpregime/expm.hpp"
#include "gpregime/fock_generators.hpp"
#include "gpregime/fock_identities.hpp"
#include "gpregime/gp.hpp"
#include "gpregime/kernels.hpp"
#include "gpregime/scattering.hpp"

using namespace gpregime;

namespace {

const potentials::InteractionPotential& well() {
  static const auto v = potentials::make_square_well(2.0, 1.0, 2001);
  return v;
}

const potentials::TrapPotential& harmonic() {
  static const auto t = potentials::make_trap(potentials::TrapKind::Harmonic, 2048, 12.0);
  return t;
}

}  // namespace

static void BM_ZeroEnergy(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(scattering::solve_zero_energy(well(), 40.0, 4096).a0);
}
BENCHMARK(BM_ZeroEnergy)->Unit(benchmark::kMillisecond);

static void BM_Neumann(benchmark::State& st) {
  const double n_ell = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(scattering::solve_neumann(well(), 0.5, n_ell / 0.5, 1024).lambda_ell);
}
BENCHMARK(BM_Neumann)->Arg(25)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_GpMinimise(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(gp::minimize_gp(harmonic(), 0.25, gp::default_grid(harmonic())).energy.total);
}
BENCHMARK(BM_GpMinimise)->Unit(benchmark::kMillisecond);

static void BM_GHat(benchmark::State& st) {
  const auto sol = scattering::solve_neumann(well(), 0.5, 200.0, 1024);
  const auto G = kernels::build_G(sol);
  const double p = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(G.hat(p));
}
BENCHMARK(BM_GHat)->Arg(10)->Arg(1000)->Unit(benchmark::kMicrosecond);

static void BM_Expm(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  a = (a - a.adjoint()).eval() / std::sqrt(static_cast<double>(n));
  for (auto _ : st) benchmark::DoNotOptimize(numerics::expm(a));
}
BENCHMARK(BM_Expm)->Arg(35)->Arg(84)->Arg(210)->Unit(benchmark::kMillisecond);

static void BM_BuildB(benchmark::State& st) {
  const int n_cap = static_cast<int>(st.range(0));
  auto space = std::make_shared<const fock::FockSpace>(3, n_cap);
  const auto c = fock::random_coefficients(3, 7);
  for (auto _ : st) benchmark::DoNotOptimize(fock::build_B(space, c.eta));
}
BENCHMARK(BM_BuildB)->Arg(3)->Arg(6)->Unit(benchmark::kMicrosecond);

static void BM_ExactCcr(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(fock::verify_ccr(3, 4, fock::NumericMode::Exact).worst());
}
BENCHMARK(BM_ExactCcr)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
