#include <benchmark/benchmark.h>

#include "robin/experiments.hpp"

using namespace robin;

namespace {

Discretization disc(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n, 2 * n, 64, 2.0};
}

void BM_AssembleStiffness(benchmark::State& state) {
  const Mesh mesh = build_rect_mesh(static_cast<std::size_t>(state.range(0)),
                                    2 * static_cast<std::size_t>(state.range(0)), 1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(mesh, Coefficient(1.0)));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(mesh.num_nodes()));
}
BENCHMARK(BM_AssembleStiffness)->Arg(16)->Arg(32)->Arg(64);

void BM_EllipticForward(benchmark::State& state) {
  ExampleSetup s = make_example("5.1", disc(state));
  const EllipticModel model(std::move(*s.elliptic));
  const BoundaryField gamma(Segment::Inaccessible, model.mesh().segment(Segment::Inaccessible).size(), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(model, gamma));
}
BENCHMARK(BM_EllipticForward)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ParabolicForward(benchmark::State& state) {
  ExampleSetup s = make_example("5.3", disc(state));
  const ParabolicModel model(std::move(*s.parabolic));
  const BoundaryField gamma(Segment::Inaccessible, model.mesh().segment(Segment::Inaccessible).size(), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward_parabolic(model, gamma));
}
BENCHMARK(BM_ParabolicForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_LmStepElliptic(benchmark::State& state) {
  ExampleSetup s = make_example("5.1", disc(state));
  const EllipticModel model(std::move(*s.elliptic));
  const BoundaryField z = add_noise(observe(model.mesh(), s.exact_u), 0.02, 1);
  const LmState start(BoundaryField(Segment::Inaccessible, model.mesh().segment(Segment::Inaccessible).size(), 2.0));
  for (auto _ : state) benchmark::DoNotOptimize(lm_step_elliptic(model, start, z, LmConfig{}));
}
BENCHMARK(BM_LmStepElliptic)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_LmStepParabolic(benchmark::State& state) {
  ExampleSetup s = make_example("5.3", disc(state));
  const ParabolicModel model(std::move(*s.parabolic));
  const BoundarySeries z = add_noise(observe(model.mesh(), model.grid(), s.exact_u), 0.02, 1);
  const LmState start(BoundaryField(Segment::Inaccessible, model.mesh().segment(Segment::Inaccessible).size(), 2.0));
  LmConfig cfg;
  cfg.tolerance = 5e-3;
  for (auto _ : state) benchmark::DoNotOptimize(lm_step_parabolic(model, start, z, cfg));
}
BENCHMARK(BM_LmStepParabolic)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_FullRun(benchmark::State& state) {
  const char* ids[] = {"5.1", "5.2", "5.3", "5.4"};
  const ExperimentSpec spec = default_spec(ids[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(spec));
  state.SetLabel(spec.example);
}
BENCHMARK(BM_FullRun)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
