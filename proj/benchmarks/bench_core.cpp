#include <benchmark/benchmark.h>

#include "ppbound/cells.hpp"
#include "ppbound/estimate.hpp"
#include "ppbound/mc.hpp"
#include "ppbound/simulate.hpp"
#include "ppbound/weights.hpp"

using namespace ppbound;

namespace {

const BoundarySpec& sine() {
  static const BoundarySpec spec(Sine{2.0, 0.5, 1.0});
  return spec;
}

void BM_SampleProcess(benchmark::State& state) {
  const double n = static_cast<double>(state.range(0));
  std::uint64_t id = 0;
  for (auto _ : state) {
    auto s = sample_process(sine(), n, 1.0, derive_replicate_seed(1, id++));
    benchmark::DoNotOptimize(s.ys.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_SampleProcess)->Arg(5000)->Arg(50000);

void BM_ReduceCells(benchmark::State& state) {
  const auto sample = sample_process(sine(), 50000.0, 1.0, 7);
  const Partition part(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto stats = reduce_cells(sample, part);
    benchmark::DoNotOptimize(stats.xi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sample.total()));
}
BENCHMARK(BM_ReduceCells)->Arg(250)->Arg(2500);

void BM_WeightRowParzen(benchmark::State& state) {
  const Partition part(static_cast<std::size_t>(state.range(0)));
  const Parzen scheme{KernelShape::Triangular, 0.05, WeightMode::Integrated};
  const double x[1] = {0.3};
  for (auto _ : state) benchmark::DoNotOptimize(weight_row(scheme, part, x).kappa_norm);
}
BENCHMARK(BM_WeightRowParzen)->Arg(250)->Arg(2500);

void BM_WeightRowDirichlet(benchmark::State& state) {
  const Partition part(600);
  const Dirichlet scheme{static_cast<std::size_t>(state.range(0)), WeightMode::Integrated};
  const double x[1] = {0.3};
  for (auto _ : state) benchmark::DoNotOptimize(weight_row(scheme, part, x).kappa_norm);
}
BENCHMARK(BM_WeightRowDirichlet)->Arg(70)->Arg(200);

// One full Monte Carlo replicate: simulate, reduce, estimate at two probes.
void BM_Replicate(benchmark::State& state) {
  ExperimentPlan plan;
  plan.spec = sine();
  plan.scheme = Parzen{KernelShape::Triangular, 0.05, WeightMode::Integrated};
  plan.probes = {{0.3}, {0.7}};
  plan.n_schedule = {5000.0};
  plan.k_rule = ScheduleRule::constant(250.0);
  plan.replicates = 1;
  const auto design = resolve_design(plan, 5000.0);
  for (auto _ : state) {
    auto out = run_replicates(plan, design, 0);
    benchmark::DoNotOptimize(out.front().fhat.data());
    ++plan.seed;
  }
}
BENCHMARK(BM_Replicate);

}  // namespace
BENCHMARK_MAIN();
