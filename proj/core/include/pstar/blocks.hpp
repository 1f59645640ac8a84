#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pstar/errors.hpp"

namespace pstar {

// Blocks are numbered 1..N. 0 is reserved as "no block".
using BlockId = std::uint32_t;

std::string block_name(BlockId b);  // "b7"

struct Predicate {
  enum class Kind { On, OnTable, Clear, HandEmpty, Holding };

  Kind kind = Kind::HandEmpty;
  BlockId a = 0;  // On: block that is on top; others: the subject block
  BlockId b = 0;  // On: the supporting block

  static Predicate on(BlockId above, BlockId below) { return {Kind::On, above, below}; }
  static Predicate ontable(BlockId x) { return {Kind::OnTable, x, 0}; }
  static Predicate clear(BlockId x) { return {Kind::Clear, x, 0}; }
  static Predicate handempty() { return {Kind::HandEmpty, 0, 0}; }
  static Predicate holding(BlockId x) { return {Kind::Holding, x, 0}; }

  bool operator==(const Predicate&) const = default;

  std::string text() const;  // "(on b1 b4)"
};

struct Action {
  enum class Kind { PickUp, PutDown, Stack, Unstack };

  Kind kind = Kind::PickUp;
  BlockId block = 0;  // the block being moved
  BlockId under = 0;  // Stack: destination; Unstack: the block beneath

  static Action pick_up(BlockId b) { return {Kind::PickUp, b, 0}; }
  static Action put_down(BlockId b) { return {Kind::PutDown, b, 0}; }
  static Action stack(BlockId b, BlockId under) { return {Kind::Stack, b, under}; }
  static Action unstack(BlockId b, BlockId under) { return {Kind::Unstack, b, under}; }

  bool operator==(const Action&) const = default;

  std::string text() const;  // "(unstack b1 b4)"
};

// Towers are listed bottom to top. No empty towers are stored. Equality
// compares the tower multiset plus the held block, not tower order.
struct WorldState {
  std::vector<std::vector<BlockId>> towers;
  std::optional<BlockId> held;

  std::size_t block_count() const;
  bool operator==(const WorldState& other) const;

  // Sorted tower encoding plus held marker; equal keys iff equal states.
  std::string canonical_key() const;
};

// Goal of a problem: either one or more stacks to build (each chain listed
// bottom to top), or a single block to end up holding. Generated problems
// always use a single chain or a retrieve target; multi-chain goals appear
// only in hand-written problems.
struct GoalSpec {
  enum class Kind { Stacks, Retrieve };

  Kind kind = Kind::Stacks;
  std::vector<std::vector<BlockId>> chains;
  BlockId target = 0;

  static GoalSpec stacks(std::vector<std::vector<BlockId>> chains) {
    GoalSpec g;
    g.kind = Kind::Stacks;
    g.chains = std::move(chains);
    return g;
  }
  static GoalSpec chain(std::vector<BlockId> c) { return stacks({std::move(c)}); }
  static GoalSpec retrieve(BlockId target) {
    GoalSpec g;
    g.kind = Kind::Retrieve;
    g.target = target;
    return g;
  }

  bool operator==(const GoalSpec&) const = default;

  bool single_chain() const { return kind == Kind::Stacks && chains.size() == 1; }

  // (above, below) pairs in chain order; empty for Retrieve.
  std::vector<std::pair<BlockId, BlockId>> on_pairs() const;
};

// Folds (above, below) facts into bottom-to-top chains ordered by first
// appearance of each chain's lowest pair. Throws UnsupportedGoalShape when a
// block is stacked twice or the relation is cyclic.
std::vector<std::vector<BlockId>> chains_from_on_pairs(
    const std::vector<std::pair<BlockId, BlockId>>& pairs);

// Builds the unique state whose relational rendering equals the given
// predicate set. Throws MissingPredicate, Conflict, Cycle or BadHand when no
// such state exists. n_blocks fixes the universe to blocks 1..n_blocks.
WorldState state_from_predicates(const std::vector<Predicate>& preds, std::size_t n_blocks);

// Canonical relational rendering: on-pairs ascending by the upper block, then
// ontable ascending, then clear ascending, then handempty or holding.
std::vector<Predicate> predicates_from_state(const WorldState& state);

// STRIPS action application with value semantics. Throws PreconditionFailed
// naming the first unsatisfied precondition in schema order, or UnknownBlock.
WorldState apply(const WorldState& state, const Action& action);

bool satisfies(const WorldState& state, const GoalSpec& goal);

// Number of blocks above b in its tower. Throws UnknownBlock or BlockHeld.
std::size_t depth(const WorldState& state, BlockId b);

// In-place plan execution. Kept separate from apply() so long plans on large
// states do not copy the tower vector once per action.
struct StepFailure {
  std::size_t step = 0;  // 0-based index into the plan
  Action action;
  std::string reason;
};

struct ExecutionResult {
  bool valid = false;            // ran to completion and satisfies the goal
  bool goal_satisfied = false;
  std::size_t steps_executed = 0;
  std::optional<StepFailure> failure;
  WorldState final_state;

  std::string reason() const;  // human-readable cause when not valid
};

ExecutionResult execute_plan(const WorldState& init, const std::vector<Action>& plan,
                             const GoalSpec& goal);

}  // namespace pstar
