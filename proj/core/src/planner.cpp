#include "pstar/planner.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <unordered_map>

namespace pstar {

namespace {

// Tower index of every block; UnknownBlock if absent (held does not count).
std::unordered_map<BlockId, std::size_t> tower_index(const WorldState& state) {
  std::unordered_map<BlockId, std::size_t> idx;
  for (std::size_t t = 0; t < state.towers.size(); ++t)
    for (BlockId b : state.towers[t]) idx[b] = t;
  return idx;
}

}  // namespace

GoalShape classify_goal(const WorldState& init, const GoalSpec& goal) {
  if (init.held) return GoalShape::Other;
  auto idx = tower_index(init);
  auto located = [&](BlockId b) { return idx.count(b) != 0; };

  if (goal.kind == GoalSpec::Kind::Retrieve)
    return located(goal.target) ? GoalShape::Retrieve : GoalShape::Other;

  if (goal.chains.size() != 1) return GoalShape::Other;
  const auto& chain = goal.chains[0];
  for (BlockId b : chain)
    if (!located(b)) return GoalShape::Other;

  std::vector<std::size_t> towers;
  towers.reserve(chain.size());
  for (BlockId b : chain) towers.push_back(idx.at(b));

  bool distinct = true;
  {
    auto sorted = towers;
    std::sort(sorted.begin(), sorted.end());
    distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  }
  if (distinct) return GoalShape::StandardChain;

  // Interleaved: [deep_1..deep_N, shallow_1..shallow_N], two targets per
  // tower, deep strictly below its shallow partner.
  if (chain.size() % 2 != 0) return GoalShape::Other;
  std::size_t n = chain.size() / 2;
  std::vector<std::size_t> deep_towers(towers.begin(), towers.begin() + static_cast<std::ptrdiff_t>(n));
  {
    auto sorted = deep_towers;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return GoalShape::Other;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (towers[n + i] != towers[i]) return GoalShape::Other;
    if (depth(init, chain[i]) <= depth(init, chain[n + i])) return GoalShape::Other;
  }
  return GoalShape::Interleaved;
}

CostBreakdown optimal_cost(const ProblemDoc& doc) {
  WorldState init = doc.initial_state();
  // A satisfied goal costs exactly zero whatever its shape; the shape
  // classifier is only consulted for goals that still need work.
  if (satisfies(init, doc.goal)) return {};
  GoalShape shape = classify_goal(init, doc.goal);
  CostBreakdown cost;
  switch (shape) {
    case GoalShape::Retrieve:
      cost.clearing = 2 * static_cast<std::uint64_t>(depth(init, doc.goal.target));
      cost.construction = 1;
      break;
    case GoalShape::StandardChain: {
      const auto& chain = doc.goal.chains[0];
      if (chain.size() < 2) break;  // vacuous goal, nothing to do
      for (BlockId b : chain) cost.clearing += 2 * static_cast<std::uint64_t>(depth(init, b));
      cost.construction = 2 * (chain.size() - 1);
      break;
    }
    case GoalShape::Interleaved: {
      const auto& chain = doc.goal.chains[0];
      std::size_t n = chain.size() / 2;
      for (std::size_t i = 0; i < n; ++i)
        cost.clearing += 2 * static_cast<std::uint64_t>(depth(init, chain[i]));
      cost.construction = 2 * n;
      break;
    }
    case GoalShape::Other:
      raise(Errc::UnsupportedGoalShape,
            "no closed-form cost for this goal over this initial state");
  }
  cost.total = cost.clearing + cost.construction;
  return cost;
}

namespace {

// Mutable tower scratchpad for the synthesizers.
struct Builder {
  std::vector<std::vector<BlockId>> towers;
  std::unordered_map<BlockId, std::size_t> where;
  std::vector<Action> plan;

  explicit Builder(const WorldState& init) : towers(init.towers), where(tower_index(init)) {}

  std::vector<BlockId>& tower_of(BlockId b) { return towers[where.at(b)]; }

  BlockId beneath(BlockId b) {
    const auto& t = tower_of(b);
    for (std::size_t i = t.size(); i-- > 1;)
      if (t[i] == b) return t[i - 1];
    return 0;  // bottom
  }

  // Unstack or pick up the top block b of its tower.
  void grasp(BlockId b) {
    auto& t = tower_of(b);
    BlockId under = t.size() > 1 ? t[t.size() - 2] : 0;
    plan.push_back(under ? Action::unstack(b, under) : Action::pick_up(b));
    t.pop_back();
    // Empty slots are tolerated here; they never become stack targets.
  }

  void park(BlockId b) {
    plan.push_back(Action::put_down(b));
    towers.push_back({b});
    where[b] = towers.size() - 1;
  }

  void place(BlockId b, BlockId onto) {
    plan.push_back(Action::stack(b, onto));
    towers[where.at(onto)].push_back(b);
    where[b] = where.at(onto);
  }

  // Moves every block above `target` to the table, top first. Indexed
  // access throughout: park() grows the tower vector and would invalidate
  // references.
  void clear_above(BlockId target) {
    std::size_t ti = where.at(target);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < towers[ti].size(); ++i)
      if (towers[ti][i] == target) pos = i;
    while (towers[ti].size() > pos + 1) {
      BlockId top = towers[ti].back();
      grasp(top);
      park(top);
    }
  }
};

}  // namespace

PlanDoc synthesize_optimal_plan(const ProblemDoc& doc) {
  WorldState init = doc.initial_state();
  if (satisfies(init, doc.goal)) return {};
  GoalShape shape = classify_goal(init, doc.goal);
  if (shape != GoalShape::StandardChain && shape != GoalShape::Retrieve)
    raise(Errc::UnsupportedGoalShape, "synthesize_optimal_plan needs a standard chain or retrieve goal");

  Builder b(init);
  if (shape == GoalShape::Retrieve) {
    b.clear_above(doc.goal.target);
    b.grasp(doc.goal.target);
    return PlanDoc{std::move(b.plan)};
  }

  const auto& chain = doc.goal.chains[0];
  if (chain.size() < 2) return {};
  b.clear_above(chain[0]);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    b.clear_above(chain[i]);
    b.grasp(chain[i]);
    b.place(chain[i], chain[i - 1]);
  }
  return PlanDoc{std::move(b.plan)};
}

PlanDoc synthesize_interleaved_plan(const ProblemDoc& doc) {
  WorldState init = doc.initial_state();
  if (satisfies(init, doc.goal)) return {};
  if (classify_goal(init, doc.goal) != GoalShape::Interleaved)
    raise(Errc::UnsupportedGoalShape, "synthesize_interleaved_plan needs an interleaved goal");

  const auto& chain = doc.goal.chains[0];
  std::size_t n = chain.size() / 2;
  Builder b(init);

  // next position in the goal chain still to be built; chain[0] anchors the
  // goal tower in place.
  std::size_t built = 1;
  auto goal_top_exposed = [&](std::size_t want) {
    return want > 0 && b.tower_of(chain[want - 1]).back() == chain[want - 1];
  };

  for (std::size_t i = 0; i < n; ++i) {
    BlockId deep = chain[i];
    auto& t = b.tower_of(deep);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] == deep) pos = k;
    while (b.tower_of(deep).size() > pos + 1) {
      BlockId top = b.tower_of(deep).back();
      b.grasp(top);
      if (built < chain.size() && top == chain[built] && goal_top_exposed(built)) {
        b.place(top, chain[built - 1]);
        ++built;
      } else {
        b.park(top);
      }
    }
    if (i > 0) {
      b.grasp(deep);
      b.place(deep, chain[i - 1]);
      ++built;
    }
  }

  while (built < chain.size()) {
    BlockId y = chain[built];
    BlockId support = chain[built - 1];
    if (b.where.at(y) == b.where.at(support) && b.beneath(y) == support) {
      ++built;  // already in position
      continue;
    }
    b.clear_above(y);
    b.grasp(y);
    b.place(y, support);
    ++built;
  }
  return PlanDoc{std::move(b.plan)};
}

namespace {

// Decodes a canonical key back into towers + held; keys are produced by
// WorldState::canonical_key.
WorldState decode_key(const std::string& key) {
  WorldState s;
  auto get = [&key](std::size_t i) {
    return static_cast<BlockId>(static_cast<unsigned char>(key[i])) |
           static_cast<BlockId>(static_cast<unsigned char>(key[i + 1])) << 8 |
           static_cast<BlockId>(static_cast<unsigned char>(key[i + 2])) << 16 |
           static_cast<BlockId>(static_cast<unsigned char>(key[i + 3])) << 24;
  };
  std::vector<BlockId> cur;
  std::size_t n = key.size() / 4;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    BlockId v = get(i * 4);
    if (v == 0) {
      s.towers.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(v);
    }
  }
  BlockId held = get((n - 1) * 4);
  if (held != 0) s.held = held;
  return s;
}

}  // namespace

PlanDoc uniform_cost_oracle(const ProblemDoc& doc, const SearchLimits& limits) {
  WorldState init = doc.initial_state();
  const GoalSpec& goal = doc.goal;
  if (satisfies(init, goal)) return {};

  struct Entry {
    std::int64_t parent = -1;
    Action action;
  };
  std::unordered_map<std::string, std::size_t> seen;  // key -> entry index
  std::vector<Entry> entries;
  std::vector<const std::string*> keys;
  std::deque<std::size_t> frontier;

  auto start = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >
           limits.max_seconds;
  };

  std::string init_key = init.canonical_key();
  auto [it0, fresh0] = seen.emplace(init_key, 0);
  entries.push_back({});
  keys.push_back(&it0->first);
  frontier.push_back(0);

  std::int64_t goal_index = -1;
  std::uint64_t expanded = 0;

  auto visit = [&](WorldState&& child, std::size_t parent, const Action& a) -> bool {
    if (entries.size() >= limits.max_states)
      raise(Errc::LimitExceeded, "state limit of " + std::to_string(limits.max_states) +
                                     " reached");
    auto [it, fresh] = seen.emplace(child.canonical_key(), entries.size());
    if (!fresh) return false;
    entries.push_back({static_cast<std::int64_t>(parent), a});
    keys.push_back(&it->first);
    frontier.push_back(entries.size() - 1);
    if (satisfies(child, goal)) {
      goal_index = static_cast<std::int64_t>(entries.size() - 1);
      return true;
    }
    return false;
  };

  while (!frontier.empty() && goal_index < 0) {
    std::size_t cur = frontier.front();
    frontier.pop_front();
    if ((++expanded & 1023) == 0 && out_of_time())
      raise(Errc::LimitExceeded, "time limit exceeded");

    WorldState state = decode_key(*keys[cur]);
    if (state.held) {
      BlockId h = *state.held;
      {
        WorldState child = state;
        child.held.reset();
        child.towers.push_back({h});
        if (visit(std::move(child), cur, Action::put_down(h))) break;
      }
      // Stack onto each clear block, ascending.
      std::vector<std::pair<BlockId, std::size_t>> tops;
      for (std::size_t t = 0; t < state.towers.size(); ++t)
        tops.emplace_back(state.towers[t].back(), t);
      std::sort(tops.begin(), tops.end());
      bool done = false;
      for (auto [top, t] : tops) {
        WorldState child = state;
        child.held.reset();
        child.towers[t].push_back(h);
        if (visit(std::move(child), cur, Action::stack(h, top))) {
          done = true;
          break;
        }
      }
      if (done) break;
    } else {
      // pick-up candidates: single-block towers, ascending block id.
      std::vector<std::pair<BlockId, std::size_t>> singles, talls;
      for (std::size_t t = 0; t < state.towers.size(); ++t) {
        if (state.towers[t].size() == 1)
          singles.emplace_back(state.towers[t][0], t);
        else
          talls.emplace_back(state.towers[t].back(), t);
      }
      std::sort(singles.begin(), singles.end());
      std::sort(talls.begin(), talls.end());
      bool done = false;
      for (auto [b, t] : singles) {
        WorldState child = state;
        child.towers.erase(child.towers.begin() + static_cast<std::ptrdiff_t>(t));
        child.held = b;
        if (visit(std::move(child), cur, Action::pick_up(b))) {
          done = true;
          break;
        }
      }
      if (done) break;
      for (auto [b, t] : talls) {
        WorldState child = state;
        child.towers[t].pop_back();
        child.held = b;
        BlockId under = state.towers[t][state.towers[t].size() - 2];
        if (visit(std::move(child), cur, Action::unstack(b, under))) {
          done = true;
          break;
        }
      }
      if (done) break;
    }
  }

  if (goal_index < 0) raise(Errc::Unsolvable, "search space exhausted without reaching the goal");

  PlanDoc plan;
  for (std::int64_t i = goal_index; i > 0; i = entries[static_cast<std::size_t>(i)].parent)
    plan.steps.push_back(entries[static_cast<std::size_t>(i)].action);
  std::reverse(plan.steps.begin(), plan.steps.end());
  return plan;
}

}  // namespace pstar
