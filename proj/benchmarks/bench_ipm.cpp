#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "ipm/engine/ipm.hpp"
#include "ipm/model/builtin.hpp"
#include "ipm/reference/limits.hpp"
#include "ipm/reference/riccati.hpp"

using namespace ipm;

namespace {

// One full IPM step (weights, move, resample) per particle, via run_ipm.
void BM_ipm_step(benchmark::State& state, const char* name, int dim) {
  model::ProblemOptions opts;
  opts.e3_dim = dim;
  const auto p = model::builtin_problem(name, opts);
  engine::RunConfig c;
  c.epsilon = 0.1;
  c.alpha = 0.25;
  c.num_particles = static_cast<std::size_t>(state.range(0));
  c.dt = std::ldexp(1.0, -7);
  c.horizon = 16 * c.dt;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine::run_ipm(*p, c).lambda_hat);
    ++c.seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.num_particles) * 16);
}
BENCHMARK_CAPTURE(BM_ipm_step, LE1, "LE1", 2)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ipm_step, E1, "E1", 2)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ipm_step, E3_d16, "E3", 16)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_resample(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::vector<double> logw(m);
  for (std::size_t i = 0; i < m; ++i) logw[i] = -0.5 * std::pow(std::sin(0.37 * i), 2) * 8.0;
  engine::Ensemble e(2, m);
  std::uint64_t step = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine::multinomial_resample(logw, e, engine::StreamKey{1, ++step}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_resample)->Arg(1 << 14)->Arg(1 << 17)->Arg(1 << 20);

void BM_riccati(benchmark::State& state) {
  model::ProblemOptions opts;
  opts.e3_dim = static_cast<int>(state.range(0));
  const auto p = model::builtin_problem("E3", opts);
  const auto& e3 = dynamic_cast<const model::CoupledProblem&>(*p);
  const reference::LinearProblemData data{e3.curvature(), e3.rotation()};
  double alpha = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::solve_riccati(data, alpha).lambda_value);
    alpha = alpha > 1.0 ? 0.0 : alpha + 0.05;
  }
}
BENCHMARK(BM_riccati)->Arg(2)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
