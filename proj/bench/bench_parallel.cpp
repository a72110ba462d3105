// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include "oscbath/runner.hpp"

using namespace oscbath;

namespace {

void table_args(benchmark::internal::Benchmark* b) { b->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond); }

template <bool Parallel>
void BM_CoefficientTable(benchmark::State& state) {
  BathSpec spec;
  spec.temperature = 1.0;
  const double t_max = static_cast<double>(state.range(0));
  for (auto _ : state) {
    TableOptions options;
    options.horizon_tolerance = 0.0;  // integrate the whole window so the work is fixed
    auto table = Parallel ? build_coefficient_table(spec, {1.0, 1.0}, 1.0, t_max, 1e-3, options)
                          : build_coefficient_table_serial(spec, {1.0, 1.0}, 1.0, t_max, 1e-3, options);
    benchmark::DoNotOptimize(table);
  }
}

Trajectory sample_trajectory() {
  RunConfig c;
  c.family = StateFamily::asymmetric;
  c.t_max = 10.0;
  const auto table = build_coefficient_table(c.bath, effective_frequencies(c.system), 1.0, c.t_max, c.table_spacing());
  EvolveOptions o;
  o.t_max = c.t_max;
  o.stride = 5;
  return evolve(c.initial_state(), c.system, table, o);
}

template <bool Parallel>
void BM_Reports(benchmark::State& state) {
  static const Trajectory trajectory = sample_trajectory();
  for (auto _ : state) {
    auto reports = Parallel ? evaluate_reports(trajectory) : evaluate_reports_serial(trajectory);
    benchmark::DoNotOptimize(reports);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(trajectory.states.size()));
}

}  // namespace

BENCHMARK(BM_CoefficientTable<false>)->Name("coefficient_table/serial")->Apply(table_args);
BENCHMARK(BM_CoefficientTable<true>)->Name("coefficient_table/openmp")->Apply(table_args);
BENCHMARK(BM_Reports<false>)->Name("entanglement_reports/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Reports<true>)->Name("entanglement_reports/openmp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
