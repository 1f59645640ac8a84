#include "pstar/blocks.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace pstar {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MissingPredicate: return "MissingPredicate";
    case Errc::Cycle: return "Cycle";
    case Errc::Conflict: return "Conflict";
    case Errc::BadHand: return "BadHand";
    case Errc::PreconditionFailed: return "PreconditionFailed";
    case Errc::UnknownBlock: return "UnknownBlock";
    case Errc::BlockHeld: return "BlockHeld";
    case Errc::Syntax: return "Syntax";
    case Errc::UnknownPredicate: return "UnknownPredicate";
    case Errc::UndeclaredObject: return "UndeclaredObject";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::DegenerateGoal: return "DegenerateGoal";
    case Errc::UnsupportedGoalShape: return "UnsupportedGoalShape";
    case Errc::LimitExceeded: return "LimitExceeded";
    case Errc::Unsolvable: return "Unsolvable";
    case Errc::InfeasibleParams: return "InfeasibleParams";
    case Errc::RejectionExhausted: return "RejectionExhausted";
    case Errc::InvalidExemplar: return "InvalidExemplar";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::Io: return "Io";
  }
  return "Error";
}

std::string block_name(BlockId b) { return "b" + std::to_string(b); }

std::string Predicate::text() const {
  switch (kind) {
    case Kind::On: return "(on " + block_name(a) + " " + block_name(b) + ")";
    case Kind::OnTable: return "(ontable " + block_name(a) + ")";
    case Kind::Clear: return "(clear " + block_name(a) + ")";
    case Kind::HandEmpty: return "(handempty)";
    case Kind::Holding: return "(holding " + block_name(a) + ")";
  }
  return "";
}

std::string Action::text() const {
  switch (kind) {
    case Kind::PickUp: return "(pick-up " + block_name(block) + ")";
    case Kind::PutDown: return "(put-down " + block_name(block) + ")";
    case Kind::Stack: return "(stack " + block_name(block) + " " + block_name(under) + ")";
    case Kind::Unstack: return "(unstack " + block_name(block) + " " + block_name(under) + ")";
  }
  return "";
}

std::size_t WorldState::block_count() const {
  std::size_t n = held ? 1 : 0;
  for (const auto& t : towers) n += t.size();
  return n;
}

std::string WorldState::canonical_key() const {
  std::vector<std::vector<BlockId>> sorted = towers;
  std::sort(sorted.begin(), sorted.end());
  std::string key;
  key.reserve(block_count() * 4 + sorted.size() + 8);
  auto put = [&key](BlockId v) {
    key.push_back(static_cast<char>(v & 0xff));
    key.push_back(static_cast<char>((v >> 8) & 0xff));
    key.push_back(static_cast<char>((v >> 16) & 0xff));
    key.push_back(static_cast<char>((v >> 24) & 0xff));
  };
  for (const auto& t : sorted) {
    for (BlockId b : t) put(b);
    put(0);
  }
  put(held ? *held : 0);
  return key;
}

bool WorldState::operator==(const WorldState& other) const {
  return held == other.held && canonical_key() == other.canonical_key();
}

std::vector<std::pair<BlockId, BlockId>> GoalSpec::on_pairs() const {
  std::vector<std::pair<BlockId, BlockId>> pairs;
  for (const auto& chain : chains)
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      pairs.emplace_back(chain[i + 1], chain[i]);
  return pairs;
}

std::vector<std::vector<BlockId>> chains_from_on_pairs(
    const std::vector<std::pair<BlockId, BlockId>>& pairs) {
  std::map<BlockId, BlockId> above_of;
  std::set<BlockId> is_above;
  for (const auto& [above, below] : pairs) {
    if (!above_of.emplace(below, above).second)
      raise(Errc::UnsupportedGoalShape, "two blocks stacked on " + block_name(below));
    if (!is_above.insert(above).second)
      raise(Errc::UnsupportedGoalShape, block_name(above) + " stacked on two blocks");
  }
  std::vector<std::vector<BlockId>> chains;
  std::set<BlockId> consumed;
  for (const auto& [above, below] : pairs) {
    (void)above;
    if (is_above.count(below)) continue;  // not a chain base
    if (consumed.count(below)) continue;
    std::vector<BlockId> chain{below};
    BlockId cur = below;
    while (true) {
      consumed.insert(cur);
      auto it = above_of.find(cur);
      if (it == above_of.end()) break;
      cur = it->second;
      chain.push_back(cur);
    }
    chains.push_back(std::move(chain));
  }
  std::size_t covered = 0;
  for (const auto& c : chains) covered += c.size() - 1;
  if (covered != pairs.size())
    raise(Errc::UnsupportedGoalShape, "goal stacking contains a cycle");
  return chains;
}

WorldState state_from_predicates(const std::vector<Predicate>& preds, std::size_t n_blocks) {
  enum class Support { None, Table, OnBlock, Hand };
  const std::size_t n = n_blocks;
  auto check_block = [n](BlockId b) {
    if (b == 0 || b > n) raise(Errc::UnknownBlock, block_name(b) + " is not in the universe");
  };

  std::vector<Support> support(n + 1, Support::None);
  std::vector<BlockId> below(n + 1, 0);   // support block when Support::OnBlock
  std::vector<BlockId> above(n + 1, 0);   // the unique block sitting on b, if any
  std::vector<bool> claimed_clear(n + 1, false);
  bool hand_empty_seen = false;
  BlockId held = 0;

  auto set_support = [&](BlockId b, Support s, BlockId under) {
    if (support[b] != Support::None && (support[b] != s || below[b] != under))
      raise(Errc::Conflict, block_name(b) + " has two support facts");
    support[b] = s;
    below[b] = under;
  };

  for (const Predicate& p : preds) {
    switch (p.kind) {
      case Predicate::Kind::On:
        check_block(p.a);
        check_block(p.b);
        if (p.a == p.b) raise(Errc::Conflict, block_name(p.a) + " cannot rest on itself");
        set_support(p.a, Support::OnBlock, p.b);
        if (above[p.b] != 0 && above[p.b] != p.a)
          raise(Errc::Conflict, "two blocks rest on " + block_name(p.b));
        above[p.b] = p.a;
        break;
      case Predicate::Kind::OnTable:
        check_block(p.a);
        set_support(p.a, Support::Table, 0);
        break;
      case Predicate::Kind::Clear:
        check_block(p.a);
        claimed_clear[p.a] = true;
        break;
      case Predicate::Kind::HandEmpty:
        if (held != 0) raise(Errc::BadHand, "(handempty) together with (holding)");
        hand_empty_seen = true;
        break;
      case Predicate::Kind::Holding:
        check_block(p.a);
        if (hand_empty_seen) raise(Errc::BadHand, "(holding) together with (handempty)");
        if (held != 0 && held != p.a) raise(Errc::BadHand, "two blocks held at once");
        held = p.a;
        set_support(p.a, Support::Hand, 0);
        break;
    }
  }

  if (!hand_empty_seen && held == 0)
    raise(Errc::BadHand, "neither (handempty) nor (holding) present");
  if (held != 0 && above[held] != 0)
    raise(Errc::Conflict, block_name(above[held]) + " rests on the held block");

  for (BlockId b = 1; b <= n; ++b)
    if (support[b] == Support::None)
      raise(Errc::MissingPredicate, block_name(b) + " has no support fact");

  WorldState state;
  std::vector<bool> placed(n + 1, false);
  if (held != 0) {
    state.held = held;
    placed[held] = true;
  }
  for (BlockId b = 1; b <= n; ++b) {
    if (support[b] != Support::Table) continue;
    std::vector<BlockId> tower;
    BlockId cur = b;
    while (cur != 0) {
      if (placed[cur]) raise(Errc::Conflict, block_name(cur) + " appears in two towers");
      placed[cur] = true;
      tower.push_back(cur);
      cur = above[cur];
    }
    state.towers.push_back(std::move(tower));
  }
  for (BlockId b = 1; b <= n; ++b)
    if (!placed[b])
      raise(Errc::Cycle, block_name(b) + " is not grounded on the table");

  std::vector<bool> is_top(n + 1, false);
  for (const auto& t : state.towers) is_top[t.back()] = true;
  for (BlockId b = 1; b <= n; ++b) {
    if (is_top[b] && !claimed_clear[b])
      raise(Errc::MissingPredicate, "missing (clear " + block_name(b) + ")");
    if (!is_top[b] && claimed_clear[b])
      raise(Errc::Conflict, "(clear " + block_name(b) + ") but " + block_name(b) +
                                " is not a tower top");
  }
  return state;
}

std::vector<Predicate> predicates_from_state(const WorldState& state) {
  std::vector<Predicate> on, table, clear;
  for (const auto& t : state.towers) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i) on.push_back(Predicate::on(t[i + 1], t[i]));
    table.push_back(Predicate::ontable(t.front()));
    clear.push_back(Predicate::clear(t.back()));
  }
  std::sort(on.begin(), on.end(), [](const Predicate& x, const Predicate& y) { return x.a < y.a; });
  std::sort(table.begin(), table.end(),
            [](const Predicate& x, const Predicate& y) { return x.a < y.a; });
  std::sort(clear.begin(), clear.end(),
            [](const Predicate& x, const Predicate& y) { return x.a < y.a; });

  std::vector<Predicate> out;
  out.reserve(on.size() + table.size() + clear.size() + 1);
  out.insert(out.end(), on.begin(), on.end());
  out.insert(out.end(), table.begin(), table.end());
  out.insert(out.end(), clear.begin(), clear.end());
  out.push_back(state.held ? Predicate::holding(*state.held) : Predicate::handempty());
  return out;
}

namespace {

struct Placement {
  std::size_t tower;
  std::size_t index;
};

std::unordered_map<BlockId, Placement> index_state(const WorldState& state) {
  std::unordered_map<BlockId, Placement> where;
  where.reserve(state.block_count());
  for (std::size_t t = 0; t < state.towers.size(); ++t)
    for (std::size_t i = 0; i < state.towers[t].size(); ++i)
      where[state.towers[t][i]] = {t, i};
  return where;
}

bool known(const WorldState& state, const std::unordered_map<BlockId, Placement>& where,
           BlockId b) {
  return where.count(b) != 0 || (state.held && *state.held == b);
}

// Returns the first unsatisfied precondition in schema order, or empty.
std::string first_failed_precondition(const WorldState& state,
                                      const std::unordered_map<BlockId, Placement>& where,
                                      const Action& a) {
  auto clear = [&](BlockId b) {
    auto it = where.find(b);
    if (it == where.end()) return false;
    const auto& t = state.towers[it->second.tower];
    return it->second.index + 1 == t.size();
  };
  auto ontable = [&](BlockId b) {
    auto it = where.find(b);
    return it != where.end() && it->second.index == 0;
  };
  auto on = [&](BlockId x, BlockId y) {
    auto it = where.find(x);
    if (it == where.end() || it->second.index == 0) return false;
    return state.towers[it->second.tower][it->second.index - 1] == y;
  };
  auto holding = [&](BlockId b) { return state.held && *state.held == b; };
  bool handempty = !state.held;

  switch (a.kind) {
    case Action::Kind::PickUp:
      if (!clear(a.block)) return Predicate::clear(a.block).text();
      if (!ontable(a.block)) return Predicate::ontable(a.block).text();
      if (!handempty) return Predicate::handempty().text();
      return "";
    case Action::Kind::PutDown:
      if (!holding(a.block)) return Predicate::holding(a.block).text();
      return "";
    case Action::Kind::Stack:
      if (!clear(a.under)) return Predicate::clear(a.under).text();
      if (!holding(a.block)) return Predicate::holding(a.block).text();
      return "";
    case Action::Kind::Unstack:
      if (!on(a.block, a.under)) return Predicate::on(a.block, a.under).text();
      if (!clear(a.block)) return Predicate::clear(a.block).text();
      if (!handempty) return Predicate::handempty().text();
      return "";
  }
  return "";
}

}  // namespace

WorldState apply(const WorldState& state, const Action& action) {
  auto where = index_state(state);
  if (!known(state, where, action.block))
    raise(Errc::UnknownBlock, block_name(action.block) + " is not in the state");
  if ((action.kind == Action::Kind::Stack || action.kind == Action::Kind::Unstack) &&
      !known(state, where, action.under))
    raise(Errc::UnknownBlock, block_name(action.under) + " is not in the state");

  std::string failed = first_failed_precondition(state, where, action);
  if (!failed.empty())
    raise(Errc::PreconditionFailed, action.text() + ": " + failed);

  WorldState next = state;
  switch (action.kind) {
    case Action::Kind::PickUp: {
      std::size_t t = where[action.block].tower;
      next.towers.erase(next.towers.begin() + static_cast<std::ptrdiff_t>(t));
      next.held = action.block;
      break;
    }
    case Action::Kind::PutDown:
      next.held.reset();
      next.towers.push_back({action.block});
      break;
    case Action::Kind::Stack:
      next.held.reset();
      next.towers[where[action.under].tower].push_back(action.block);
      break;
    case Action::Kind::Unstack:
      next.towers[where[action.block].tower].pop_back();
      next.held = action.block;
      break;
  }
  return next;
}

bool satisfies(const WorldState& state, const GoalSpec& goal) {
  auto where = index_state(state);
  auto require_known = [&](BlockId b) {
    if (!known(state, where, b))
      raise(Errc::UnknownBlock, "goal references " + block_name(b) + " which is not in the state");
  };
  if (goal.kind == GoalSpec::Kind::Retrieve) {
    require_known(goal.target);
    return state.held && *state.held == goal.target;
  }
  for (const auto& [above, below] : goal.on_pairs()) {
    require_known(above);
    require_known(below);
    auto it = where.find(above);
    if (it == where.end() || it->second.index == 0) return false;
    if (state.towers[it->second.tower][it->second.index - 1] != below) return false;
  }
  return true;
}

std::size_t depth(const WorldState& state, BlockId b) {
  if (state.held && *state.held == b)
    raise(Errc::BlockHeld, block_name(b) + " is in the hand");
  for (const auto& t : state.towers)
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] == b) return t.size() - i - 1;
  raise(Errc::UnknownBlock, block_name(b) + " is not in the state");
}

std::string ExecutionResult::reason() const {
  if (valid) return "";
  if (failure)
    return "step " + std::to_string(failure->step + 1) + " " + failure->action.text() + ": " +
           failure->reason;
  return "goal not satisfied in final state";
}

ExecutionResult execute_plan(const WorldState& init, const std::vector<Action>& plan,
                             const GoalSpec& goal) {
  // Towers keyed by creation slot so lookups stay O(log W) on long plans.
  std::map<std::uint32_t, std::vector<BlockId>> towers;
  std::unordered_map<BlockId, std::uint32_t> slot_of;
  std::uint32_t next_slot = 0;
  for (const auto& t : init.towers) {
    towers[next_slot] = t;
    for (BlockId b : t) slot_of[b] = next_slot;
    ++next_slot;
  }
  std::optional<BlockId> held = init.held;

  auto fail_pred = [&](const Action& a) -> std::string {
    auto top_of = [&](BlockId b) -> bool {
      auto it = slot_of.find(b);
      return it != slot_of.end() && towers[it->second].back() == b;
    };
    auto bottom_of = [&](BlockId b) -> bool {
      auto it = slot_of.find(b);
      return it != slot_of.end() && towers[it->second].front() == b;
    };
    auto on = [&](BlockId x, BlockId y) -> bool {
      auto it = slot_of.find(x);
      if (it == slot_of.end()) return false;
      const auto& t = towers[it->second];
      for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] == x) return t[i - 1] == y;
      return false;
    };
    bool handempty = !held;
    auto holding = [&](BlockId b) { return held && *held == b; };

    switch (a.kind) {
      case Action::Kind::PickUp:
        if (!top_of(a.block)) return Predicate::clear(a.block).text();
        if (!bottom_of(a.block)) return Predicate::ontable(a.block).text();
        if (!handempty) return Predicate::handempty().text();
        return "";
      case Action::Kind::PutDown:
        if (!holding(a.block)) return Predicate::holding(a.block).text();
        return "";
      case Action::Kind::Stack:
        if (!top_of(a.under)) return Predicate::clear(a.under).text();
        if (!holding(a.block)) return Predicate::holding(a.block).text();
        return "";
      case Action::Kind::Unstack:
        if (!on(a.block, a.under)) return Predicate::on(a.block, a.under).text();
        if (!top_of(a.block)) return Predicate::clear(a.block).text();
        if (!handempty) return Predicate::handempty().text();
        return "";
    }
    return "";
  };

  ExecutionResult result;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Action& a = plan[i];
    std::string failed = fail_pred(a);
    if (!failed.empty()) {
      result.failure = StepFailure{i, a, "precondition " + failed + " not satisfied"};
      break;
    }
    switch (a.kind) {
      case Action::Kind::PickUp: {
        std::uint32_t s = slot_of[a.block];
        towers.erase(s);
        slot_of.erase(a.block);
        held = a.block;
        break;
      }
      case Action::Kind::PutDown: {
        std::uint32_t s = next_slot++;
        towers[s] = {a.block};
        slot_of[a.block] = s;
        held.reset();
        break;
      }
      case Action::Kind::Stack: {
        std::uint32_t s = slot_of[a.under];
        towers[s].push_back(a.block);
        slot_of[a.block] = s;
        held.reset();
        break;
      }
      case Action::Kind::Unstack: {
        std::uint32_t s = slot_of[a.block];
        towers[s].pop_back();
        slot_of.erase(a.block);
        held = a.block;
        break;
      }
    }
    ++result.steps_executed;
  }

  result.final_state.held = held;
  result.final_state.towers.reserve(towers.size());
  for (auto& [slot, t] : towers) result.final_state.towers.push_back(std::move(t));
  if (!result.failure) result.goal_satisfied = satisfies(result.final_state, goal);
  result.valid = !result.failure && result.goal_satisfied;
  return result;
}

}  // namespace pstar
