#include "diffeval/envs.hpp"
#include "diffeval/learners.hpp"
#include "diffeval/oracle.hpp"
#include "diffeval/problem.hpp"
#include "diffeval/rng.hpp"
#include "diffeval/sampling.hpp"

#include <benchmark/benchmark.h>

using namespace diffeval;

namespace {

EvaluationProblem make_problem(int n_pairs, int k) {
  RandomMdpSpec spec;
  spec.n_pairs = n_pairs;
  spec.num_features = k;
  spec.sigma = 0.1;
  spec.seed = 17;
  RandomInstance inst = random_mdp(spec);
  return EvaluationProblem::create(std::move(inst.mdp), std::move(inst.policy),
                                   std::move(inst.d_mu), std::move(inst.features));
}

void BM_Draw(benchmark::State& state) {
  const EvaluationProblem p = make_problem(static_cast<int>(state.range(0)), 4);
  const SamplingDistribution sampler = p.sampler();
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(rng));
}
BENCHMARK(BM_Draw)->Arg(10)->Arg(100)->Arg(1000);

void BM_Step(benchmark::State& state) {
  const auto algo = static_cast<Algorithm>(state.range(0));
  const EvaluationProblem p = make_problem(50, static_cast<int>(state.range(1)));
  const SamplingDistribution sampler = p.sampler();
  Rng rng(2);
  StepSizes sizes;
  sizes.alpha = StepSchedule::constant(1e-3);
  sizes.eta = 0.1;
  sizes.lambda = 1.0;
  LearnerState s = initial_state(algo, p.n_features());
  std::vector<std::pair<SampleTuple, SampleTuple>> samples;
  for (int i = 0; i < 1024; ++i) samples.push_back(sampler.draw_pair(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = samples[i++ & 1023];
    s = step(algo, std::move(s), a, &b, p.features, sizes);
    benchmark::DoNotOptimize(s);
  }
  state.SetLabel(to_string(algo));
}

void step_args(benchmark::internal::Benchmark* b) {
  for (Algorithm a : all_algorithms()) {
    for (int k : {4, 32}) b->Args({static_cast<int>(a), k});
  }
}
BENCHMARK(BM_Step)->Apply(step_args);

void BM_Assemble(benchmark::State& state) {
  const EvaluationProblem p = make_problem(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(p));
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(100)->Arg(500);

void BM_FixedPoint(benchmark::State& state) {
  const EvaluationProblem p = make_problem(100, static_cast<int>(state.range(0)));
  const FixedPointMatrices m = assemble(p);
  for (auto _ : state) benchmark::DoNotOptimize(td_fixed_point(m));
}
BENCHMARK(BM_FixedPoint)->Arg(4)->Arg(32);

void BM_Assumption7Threshold(benchmark::State& state) {
  const EvaluationProblem p = make_problem(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(assumption_7_threshold(p));
}
BENCHMARK(BM_Assumption7Threshold)->Arg(10)->Arg(100);

}  // namespace
BENCHMARK_MAIN();
