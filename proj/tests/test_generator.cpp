#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "helpers.hpp"
#include "pstar/generator.hpp"
#include "pstar/planner.hpp"

using namespace pstar;

TEST_CASE("params validation") {
  CHECK_NOTHROW(CurriculumParams{4, 2, 5, 3, GoalMode::Chain}.validate());
  CHECK_THROWS_AS((CurriculumParams{2, 2, 5, 3, GoalMode::Chain}.validate()), Error);
  CHECK_THROWS_AS((CurriculumParams{2, 5, 2, 2, GoalMode::Chain}.validate()), Error);
  CHECK_THROWS_AS((CurriculumParams{2, 2, 5, 2, GoalMode::Retrieve}.validate()), Error);
  CHECK_THROWS_AS((CurriculumParams{2, 2, 5, 3, GoalMode::Interleaved}.validate()), Error);
  CHECK_THROWS_AS((CurriculumParams{2, 2, 5, 4, GoalMode::Interleaved}.validate()), Error);
  CHECK_NOTHROW(CurriculumParams{2, 3, 5, 4, GoalMode::Interleaved}.validate());
  CHECK_THROWS_AS((CurriculumParams{0, 1, 1, 1, GoalMode::Chain}.validate()), Error);
}

TEST_CASE("derived seeds are stable and well spread") {
  CHECK(derive_seed(7, "x", 0, 0) == derive_seed(7, "x", 0, 0));
  std::set<std::uint64_t> seeds;
  for (std::uint64_t master : {0ull, 1ull, 7ull})
    for (std::uint64_t step : {0ull, 1ull, 2ull})
      for (std::uint64_t attempt : {0ull, 1ull})
        for (const char* name : {"a", "b"})
          seeds.insert(derive_seed(master, name, step, attempt));
  CHECK(seeds.size() == 3 * 3 * 2 * 2);
}

TEST_CASE("instance naming encodes the parameters") {
  CurriculumParams p{6, 5, 10, 2, GoalMode::Chain};
  ProblemDoc doc = generate_instance(p, 99, "grand_challenge");
  CHECK(doc.name == "grand_challenge_h05-10_w006_s02");
}

TEST_CASE("generation is deterministic in the seed") {
  CurriculumParams p{4, 2, 5, 3, GoalMode::Chain};
  ProblemDoc a = generate_instance(p, 42, "d");
  ProblemDoc b = generate_instance(p, 42, "d");
  CHECK(a == b);
  CHECK(a.source_text == b.source_text);
  ProblemDoc c = generate_instance(p, 43, "d");
  CHECK(!(a == c));
}

TEST_CASE("generated instances satisfy the structural contract") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 150; ++i) {
    CurriculumParams p = testutil::random_params(rng);
    ProblemDoc doc = generate_instance(p, rng(), "s");
    WorldState init = doc.initial_state();

    CHECK(init.towers.size() == p.width);
    CHECK(!init.held.has_value());
    std::size_t blocks = 0;
    for (const auto& t : init.towers) {
      CHECK(t.size() >= p.height_min);
      CHECK(t.size() <= p.height_max);
      blocks += t.size();
    }
    CHECK(doc.objects.size() == blocks);

    std::map<BlockId, std::size_t> tower_of;
    for (std::size_t t = 0; t < init.towers.size(); ++t)
      for (BlockId b : init.towers[t]) tower_of[b] = t;

    switch (p.goal_mode) {
      case GoalMode::Chain: {
        REQUIRE(doc.goal.single_chain());
        const auto& chain = doc.goal.chains[0];
        CHECK(chain.size() == p.targets);
        std::set<std::size_t> towers_used;
        for (BlockId b : chain) towers_used.insert(tower_of.at(b));
        CHECK(towers_used.size() == chain.size());  // one target per tower
        // the chain base sits on the table
        CHECK(init.towers[tower_of.at(chain[0])][0] == chain[0]);
        break;
      }
      case GoalMode::Retrieve:
        REQUIRE(doc.goal.kind == GoalSpec::Kind::Retrieve);
        CHECK(tower_of.count(doc.goal.target) == 1);
        break;
      case GoalMode::Interleaved: {
        REQUIRE(doc.goal.single_chain());
        const auto& chain = doc.goal.chains[0];
        REQUIRE(chain.size() == 2 * p.width);
        std::size_t n = p.width;
        std::set<std::size_t> deep_towers;
        for (std::size_t k = 0; k < n; ++k) {
          CHECK(tower_of.at(chain[k]) == tower_of.at(chain[n + k]));
          CHECK(depth(init, chain[k]) > depth(init, chain[n + k]));
          deep_towers.insert(tower_of.at(chain[k]));
        }
        CHECK(deep_towers.size() == n);
        break;
      }
    }
  }
}

TEST_CASE("init predicate order is scrambled but recoverable") {
  CurriculumParams p{5, 3, 6, 3, GoalMode::Chain};
  ProblemDoc doc = generate_instance(p, 7, "scr");
  // same multiset as the canonical rendering, different sequence
  auto canonical = predicates_from_state(doc.initial_state());
  CHECK(doc.init.size() == canonical.size());
  auto sorted_copy = [](std::vector<Predicate> v) {
    std::sort(v.begin(), v.end(), [](const Predicate& a, const Predicate& b) {
      return std::tuple(static_cast<int>(a.kind), a.a, a.b) <
             std::tuple(static_cast<int>(b.kind), b.a, b.b);
    });
    return v;
  };
  CHECK(sorted_copy(doc.init) == sorted_copy(canonical));
  CHECK(doc.init != canonical);  // the shuffle actually moved something
}

TEST_CASE("curricula are cost monotone and deterministic") {
  CurriculumSchedule schedule = preset_schedule("grand_challenge");
  REQUIRE(schedule.steps.size() == 33);

  auto run1 = generate_curriculum(schedule, 7);
  auto run2 = generate_curriculum(schedule, 7);
  REQUIRE(run1.size() == 33);
  for (std::size_t i = 0; i < run1.size(); ++i) {
    CHECK(run1[i].doc == run2[i].doc);
    CHECK(run1[i].seed == run2[i].seed);
    CHECK(run1[i].cost == run2[i].cost);
    if (i > 0) CHECK(run1[i - 1].cost.total <= run1[i].cost.total);
    CHECK(run1[i].cost == optimal_cost(run1[i].doc));
    CHECK(run1[i].step_index == i);
    CHECK(run1[i].curriculum == "grand_challenge");
  }

  auto other_seed = generate_curriculum(schedule, 8);
  bool any_differ = false;
  for (std::size_t i = 0; i < run1.size(); ++i)
    if (!(other_seed[i].doc == run1[i].doc)) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("complexity axis follows the goal mode") {
  auto one = [](CurriculumParams p, const char* name) {
    CurriculumSchedule s{name, {p}};
    return generate_curriculum(s, 3).at(0);
  };
  // the axis is a schedule coordinate, so it uses the height midpoint
  auto chain = one({4, 2, 4, 3, GoalMode::Chain}, "c");
  CHECK(chain.complexity_axis == doctest::Approx(3.0 * 4 * 3));

  auto retrieve = one({3, 2, 4, 1, GoalMode::Retrieve}, "r");
  CHECK(retrieve.complexity_axis == doctest::Approx(3.0));

  auto inter = one({3, 3, 4, 6, GoalMode::Interleaved}, "i");
  CHECK(inter.complexity_axis == doctest::Approx(3.0));
}

TEST_CASE("rejection sampling tightens costs and can exhaust") {
  // step 1 always costs at least 6; step 2 can never exceed 2
  CurriculumSchedule impossible{"imp",
                                {{4, 9, 9, 4, GoalMode::Chain}, {2, 1, 1, 2, GoalMode::Chain}}};
  GenerateOptions opts;
  opts.max_attempts = 64;
  try {
    generate_curriculum(impossible, 1, opts);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RejectionExhausted);
  }
}

TEST_CASE("presets are well formed") {
  for (const std::string& name : preset_names()) {
    CurriculumSchedule s = preset_schedule(name);
    CHECK(s.name == name);
    CHECK(!s.steps.empty());
    for (const CurriculumParams& p : s.steps) CHECK_NOTHROW(p.validate());
  }
  CHECK_THROWS_AS(preset_schedule("bogus"), Error);

  CHECK(preset_schedule("harvest").steps.size() == 55);
  CHECK(preset_schedule("interleaved_harvest").steps.size() == 50);
  CHECK(preset_schedule("high_towers").steps.size() == 50);

  // spot-check the table-driven schedule
  CurriculumSchedule gc = preset_schedule("grand_challenge");
  CHECK(gc.steps.front() == CurriculumParams{6, 5, 10, 2, GoalMode::Chain});
  CHECK(gc.steps.back() == CurriculumParams{98, 54, 59, 21, GoalMode::Chain});
  CurriculumSchedule ht = preset_schedule("high_towers");
  CHECK(ht.steps.front() == CurriculumParams{12, 8, 13, 1, GoalMode::Retrieve});
  CHECK(ht.steps.back() == CurriculumParams{12, 988, 993, 1, GoalMode::Retrieve});
}
