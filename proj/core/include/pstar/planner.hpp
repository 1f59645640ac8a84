#pragma once

#include <cstdint>
#include <vector>

#include "pstar/pddl.hpp"

namespace pstar {

struct CostBreakdown {
  std::uint64_t clearing = 0;      // 2 actions per block that must be moved aside
  std::uint64_t construction = 0;  // actions that place target blocks
  std::uint64_t total = 0;

  bool operator==(const CostBreakdown&) const = default;
};

// Goal shapes the analytic machinery understands. Standard: a single chain
// whose targets sit in pairwise distinct towers. Interleaved: a single chain
// [deep_1..deep_N, shallow_1..shallow_N] with exactly two targets per source
// tower, deep below shallow. Anything else is Other.
enum class GoalShape { StandardChain, Retrieve, Interleaved, Other };

GoalShape classify_goal(const WorldState& init, const GoalSpec& goal);

// Closed-form optimal cost. For standard chains this is exact:
// sum of 2*depth(target) plus 2*(k-1). For retrieve goals: 2*depth + 1.
// For interleaved goals this returns the curriculum's analytic figure,
// sum of 2*depth(deep_i) plus 2N, which a plan may legitimately exceed.
// Throws UnsupportedGoalShape for anything else (multi-chain goals, goals
// over states with a held block, arbitrary target layouts).
CostBreakdown optimal_cost(const ProblemDoc& doc);

// Emits a provably optimal plan for standard chain and retrieve goals:
// clear the base tower, then clear, grasp and stack each remaining target in
// chain order. Satisfied goals yield the empty plan.
PlanDoc synthesize_optimal_plan(const ProblemDoc& doc);

// Plan builder for interleaved goals. Parks obstacles on the table, stacks a
// popped block directly into the goal chain whenever it is the next chain
// block and its support is already exposed, then places the remaining
// shallow targets from the table. Valid by construction; length is bounded
// by sum(2*depth(deep_i)) + 4N - 2 and can exceed the analytic figure.
PlanDoc synthesize_interleaved_plan(const ProblemDoc& doc);

struct SearchLimits {
  std::uint64_t max_states = 10'000'000;
  double max_seconds = 60.0;
};

// Breadth-first search over canonical states with unit action costs.
// Ties break toward the action ordering pick-up < put-down < stack <
// unstack, then ascending block indices. Throws LimitExceeded when a limit
// is hit and Unsolvable when the space is exhausted.
PlanDoc uniform_cost_oracle(const ProblemDoc& doc, const SearchLimits& limits = {});

}  // namespace pstar
