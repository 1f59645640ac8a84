#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "pstar/blocks.hpp"
#include "pstar/generator.hpp"

// Random scenario builders shared across the test binaries. These use the
// standard library RNG: the assertions here are within-run, so they do not
// need the cross-platform draw stability the generator itself guarantees.
namespace testutil {

inline pstar::WorldState random_state(std::mt19937_64& rng, std::uint32_t n_blocks,
                                      std::uint32_t max_towers, bool allow_held) {
  std::vector<pstar::BlockId> perm(n_blocks);
  std::iota(perm.begin(), perm.end(), 1u);
  std::shuffle(perm.begin(), perm.end(), rng);

  pstar::WorldState state;
  std::size_t at = 0;
  if (allow_held && n_blocks > 0 && std::uniform_int_distribution<int>(0, 3)(rng) == 0)
    state.held = perm[at++];
  std::uint32_t towers = std::uniform_int_distribution<std::uint32_t>(1, max_towers)(rng);
  for (std::uint32_t t = 0; t < towers && at < perm.size(); ++t)
    state.towers.push_back({perm[at++]});
  while (at < perm.size()) {
    std::size_t t = std::uniform_int_distribution<std::size_t>(0, state.towers.size() - 1)(rng);
    state.towers[t].push_back(perm[at++]);
  }
  return state;
}

inline std::vector<pstar::Action> legal_actions(const pstar::WorldState& s) {
  std::vector<pstar::Action> out;
  if (s.held) {
    out.push_back(pstar::Action::put_down(*s.held));
    for (const auto& t : s.towers) out.push_back(pstar::Action::stack(*s.held, t.back()));
    return out;
  }
  for (const auto& t : s.towers) {
    if (t.size() == 1)
      out.push_back(pstar::Action::pick_up(t[0]));
    else
      out.push_back(pstar::Action::unstack(t.back(), t[t.size() - 2]));
  }
  return out;
}

// Feasible parameters for one of the three goal modes, kept small enough
// that targets >= 2 so every sampled problem is emittable.
inline pstar::CurriculumParams random_params(std::mt19937_64& rng) {
  auto pick = [&](std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
  };
  pstar::CurriculumParams p;
  switch (pick(0, 2)) {
    case 0:
      p.goal_mode = pstar::GoalMode::Chain;
      p.width = pick(2, 6);
      p.height_min = pick(1, 4);
      p.height_max = p.height_min + pick(0, 3);
      p.targets = pick(2, p.width);
      break;
    case 1:
      p.goal_mode = pstar::GoalMode::Retrieve;
      p.width = pick(1, 6);
      p.height_min = pick(1, 4);
      p.height_max = p.height_min + pick(0, 3);
      p.targets = 1;
      break;
    default:
      p.goal_mode = pstar::GoalMode::Interleaved;
      p.width = pick(1, 4);
      p.height_min = pick(3, 5);
      p.height_max = p.height_min + pick(0, 2);
      p.targets = 2 * p.width;
      break;
  }
  p.validate();
  return p;
}

}  // namespace testutil
