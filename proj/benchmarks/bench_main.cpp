#include <benchmark/benchmark.h>

#include <cstdint>

#include "pstar/generator.hpp"
#include "pstar/graph.hpp"
#include "pstar/harness.hpp"
#include "pstar/planner.hpp"

using namespace pstar;

namespace {

CurriculumParams chain_params(std::uint32_t width, std::uint32_t height) {
  CurriculumParams p;
  p.goal_mode = GoalMode::Chain;
  p.width = width;
  p.height_min = height;
  p.height_max = height + 5;
  p.targets = width >= 2 ? 2 : 1;
  return p;
}

void BM_GenerateInstance(benchmark::State& state) {
  CurriculumParams p = chain_params(static_cast<std::uint32_t>(state.range(0)),
                                    static_cast<std::uint32_t>(state.range(1)));
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(generate_instance(p, seed++, "bench"));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GenerateInstance)->Args({6, 5})->Args({21, 20})->Args({54, 54});

void BM_AnalyticCost(benchmark::State& state) {
  ProblemDoc doc = generate_instance(chain_params(static_cast<std::uint32_t>(state.range(0)),
                                                  static_cast<std::uint32_t>(state.range(1))),
                                     7, "bench");
  for (auto _ : state)
    benchmark::DoNotOptimize(optimal_cost(doc));
}
BENCHMARK(BM_AnalyticCost)->Args({6, 5})->Args({54, 54});

void BM_SynthesizePlan(benchmark::State& state) {
  ProblemDoc doc = generate_instance(chain_params(static_cast<std::uint32_t>(state.range(0)),
                                                  static_cast<std::uint32_t>(state.range(1))),
                                     7, "bench");
  for (auto _ : state)
    benchmark::DoNotOptimize(synthesize_optimal_plan(doc));
}
BENCHMARK(BM_SynthesizePlan)->Args({6, 5})->Args({54, 54});

void BM_UniformCostOracle(benchmark::State& state) {
  CurriculumParams p;
  p.goal_mode = GoalMode::Chain;
  p.width = 3;
  p.height_min = 1;
  p.height_max = static_cast<std::uint32_t>(state.range(0));
  p.targets = 2;
  ProblemDoc doc = generate_instance(p, 5, "bench");
  for (auto _ : state)
    benchmark::DoNotOptimize(uniform_cost_oracle(doc, SearchLimits{}));
}
BENCHMARK(BM_UniformCostOracle)->Arg(1)->Arg(2);

void BM_ValidatePlan(benchmark::State& state) {
  ProblemDoc doc = generate_instance(chain_params(static_cast<std::uint32_t>(state.range(0)),
                                                  static_cast<std::uint32_t>(state.range(1))),
                                     7, "bench");
  PlanDoc plan = synthesize_optimal_plan(doc);
  WorldState init = doc.initial_state();
  for (auto _ : state)
    benchmark::DoNotOptimize(execute_plan(init, plan.steps, doc.goal));
  state.SetItemsProcessed(state.iterations() * plan.length());
}
BENCHMARK(BM_ValidatePlan)->Args({6, 5})->Args({54, 54});

void BM_ProblemRoundTrip(benchmark::State& state) {
  ProblemDoc doc = generate_instance(chain_params(static_cast<std::uint32_t>(state.range(0)),
                                                  static_cast<std::uint32_t>(state.range(1))),
                                     7, "bench");
  for (auto _ : state)
    benchmark::DoNotOptimize(parse_problem(emit_problem(doc)));
}
BENCHMARK(BM_ProblemRoundTrip)->Args({6, 5})->Args({54, 54});

void BM_PlanTranslation(benchmark::State& state) {
  ProblemDoc doc = generate_instance(chain_params(static_cast<std::uint32_t>(state.range(0)),
                                                  static_cast<std::uint32_t>(state.range(1))),
                                     7, "bench");
  PlanDoc plan = synthesize_optimal_plan(doc);
  for (auto _ : state)
    benchmark::DoNotOptimize(translate_graph_plan(translate_plan(plan)));
  state.SetItemsProcessed(state.iterations() * plan.length());
}
BENCHMARK(BM_PlanTranslation)->Args({6, 5})->Args({54, 54});

void BM_BuildPrompt(benchmark::State& state) {
  ProblemDoc doc = generate_instance(chain_params(6, 5), 7, "bench");
  Representation repr = state.range(0) == 0 ? Representation::Blocksworld
                                            : Representation::Graph;
  for (auto _ : state) {
    PromptBundle b = build_prompt(doc, repr);
    benchmark::DoNotOptimize(b.text());
  }
}
BENCHMARK(BM_BuildPrompt)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
