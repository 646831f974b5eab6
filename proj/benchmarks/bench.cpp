#include <benchmark/benchmark.h>

#include <random>

#include "latgas/diffusion.hpp"
#include "latgas/dynamics.hpp"
#include "latgas/pde.hpp"

using namespace latgas;

namespace {

struct Fixture {
  CylinderLattice lat;
  DisorderField field;
  ThermoContext ctx;
  ProfileSpec bdry;
  Configuration eta;
  EventTable table;

  explicit Fixture(int N, int d = 1)
      : lat(d, N),
        field(sample_field(lat, DisorderLaw::two_point(1.0), 3)),
        ctx(field.law),
        bdry(ProfileSpec::linear(0.2, 0.8)),
        eta(sample_profile_configuration(field, bdry, ctx, 5)),
        table(field, ctx, bdry, eta) {}
};

void BM_event_pick_and_update(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(7);
  for (auto _ : state) {
    StepResult s = step(f.table, f.eta, rng);
    benchmark::DoNotOptimize(s.dt);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_event_pick_and_update)->Arg(64)->Arg(256)->Arg(1024);

void BM_kmc_run_2d(benchmark::State& state) {
  for (auto _ : state) {
    Fixture f(static_cast<int>(state.range(0)), 2);
    std::mt19937_64 rng(11);
    std::uint64_t events = 0;
    for (int i = 0; i < 20000; ++i) {
      step(f.table, f.eta, rng);
      ++events;
    }
    benchmark::DoNotOptimize(events);
  }
}
BENCHMARK(BM_kmc_run_2d)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_pde_step(benchmark::State& state) {
  FluxFunction flux = FluxFunction::from_table(DiffusionTensorTable::identity(1));
  MacroGrid grid{1, static_cast<int>(state.range(0)), 1};
  MacroField field = MacroField::constant(grid, 0.5, 0.2, 0.8);
  double dt = stable_dt(grid, flux);
  for (auto _ : state) {
    field = explicit_step(field, flux, dt);
    benchmark::DoNotOptimize(field.values.data());
  }
  state.SetItemsProcessed(state.iterations() * grid.cells());
}
BENCHMARK(BM_pde_step)->Arg(256)->Arg(1024)->Arg(4096);

void BM_diffusion_draw(benchmark::State& state) {
  LocalFunctionBasis basis = LocalFunctionBasis::degree2(1, 1);
  for (auto _ : state) {
    auto blocks = estimate_quadratic_blocks(basis, DisorderLaw::two_point(1.0), 0.5,
                                            state.range(0), 13);
    benchmark::DoNotOptimize(blocks.P.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_diffusion_draw)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
