#include "pstar/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

namespace pstar {

std::string_view goal_mode_name(GoalMode m) {
  switch (m) {
    case GoalMode::Chain: return "chain";
    case GoalMode::Retrieve: return "retrieve";
    case GoalMode::Interleaved: return "interleaved";
  }
  return "";
}

void CurriculumParams::validate() const {
  if (width == 0) raise(Errc::InfeasibleParams, "width must be positive");
  if (height_min == 0) raise(Errc::InfeasibleParams, "height_min must be positive");
  if (height_min > height_max)
    raise(Errc::InfeasibleParams, "height_min exceeds height_max");
  if (targets == 0) raise(Errc::InfeasibleParams, "targets must be positive");
  switch (goal_mode) {
    case GoalMode::Chain:
      if (targets > width)
        raise(Errc::InfeasibleParams, "chain goals need one tower per target");
      break;
    case GoalMode::Retrieve:
      if (targets != 1) raise(Errc::InfeasibleParams, "retrieve goals take exactly one target");
      break;
    case GoalMode::Interleaved:
      if (targets != 2 * width)
        raise(Errc::InfeasibleParams, "interleaved goals take exactly two targets per tower");
      if (height_min < 3)
        raise(Errc::InfeasibleParams, "interleaved goals need height_min >= 3");
      break;
  }
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic bounded draws on top of the standardized mt19937_64 stream;
// uniform_int_distribution is implementation-defined, so it is not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling over equal-sized buckets keeps the draw unbiased.
    std::uint64_t bucket = UINT64_MAX / n;
    std::uint64_t limit = bucket * n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r / bucket;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view curriculum, std::uint64_t step,
                          std::uint64_t attempt) {
  std::uint64_t h = mix64(master ^ fnv1a(curriculum));
  h = mix64(h ^ step);
  return mix64(h ^ attempt);
}

ProblemDoc generate_instance(const CurriculumParams& params, std::uint64_t seed,
                             std::string_view name_prefix) {
  params.validate();
  Rng rng(seed);

  std::uint32_t w = params.width;
  std::vector<std::uint32_t> heights(w);
  std::uint64_t span = params.height_max - params.height_min + 1;
  for (auto& h : heights)
    h = params.height_min + static_cast<std::uint32_t>(rng.below(span));
  std::uint64_t n = std::accumulate(heights.begin(), heights.end(), std::uint64_t{0});

  // Scrambled naming: conceptual slot (tower-major, bottom to top) -> block.
  std::vector<BlockId> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  rng.shuffle(perm);

  WorldState state;
  state.towers.resize(w);
  {
    std::size_t at = 0;
    for (std::uint32_t t = 0; t < w; ++t) {
      state.towers[t].assign(perm.begin() + static_cast<std::ptrdiff_t>(at),
                             perm.begin() + static_cast<std::ptrdiff_t>(at + heights[t]));
      at += heights[t];
    }
  }

  GoalSpec goal;
  switch (params.goal_mode) {
    case GoalMode::Chain: {
      std::size_t base_tower = rng.below(w);
      std::vector<BlockId> chain{state.towers[base_tower].front()};
      std::vector<std::size_t> others;
      others.reserve(w - 1);
      for (std::size_t t = 0; t < w; ++t)
        if (t != base_tower) others.push_back(t);
      for (std::uint32_t k = 1; k < params.targets; ++k) {
        std::size_t pick = rng.below(others.size());
        std::size_t tower = others[pick];
        others.erase(others.begin() + static_cast<std::ptrdiff_t>(pick));
        chain.push_back(state.towers[tower][rng.below(state.towers[tower].size())]);
      }
      goal = GoalSpec::chain(std::move(chain));
      break;
    }
    case GoalMode::Retrieve: {
      std::uint64_t slot = rng.below(n);
      goal = GoalSpec::retrieve(perm[slot]);
      break;
    }
    case GoalMode::Interleaved: {
      std::vector<BlockId> deep(w), shallow(w);
      for (std::uint32_t t = 0; t < w; ++t) {
        std::size_t h = state.towers[t].size();
        std::size_t a = rng.below(h);
        std::size_t b = rng.below(h - 1);
        if (b >= a) ++b;  // two distinct positions
        deep[t] = state.towers[t][std::min(a, b)];
        shallow[t] = state.towers[t][std::max(a, b)];
      }
      std::vector<BlockId> chain(deep);
      chain.insert(chain.end(), shallow.begin(), shallow.end());
      goal = GoalSpec::chain(std::move(chain));
      break;
    }
  }

  ProblemDoc doc;
  doc.objects.resize(n);
  std::iota(doc.objects.begin(), doc.objects.end(), 1);
  doc.init = predicates_from_state(state);
  rng.shuffle(doc.init);
  doc.goal = std::move(goal);

  char buf[64];
  std::snprintf(buf, sizeof buf, "_h%02u-%02u_w%03u_s%02u", params.height_min, params.height_max,
                params.width, params.targets);
  doc.name = std::string(name_prefix) + buf;

  if (!(doc.goal.kind == GoalSpec::Kind::Stacks && doc.goal.on_pairs().empty()))
    doc.source_text = emit_problem(doc);
  return doc;
}

namespace {

double complexity_axis_for(const CurriculumParams& p) {
  double mean_h = (static_cast<double>(p.height_min) + p.height_max) / 2.0;
  switch (p.goal_mode) {
    case GoalMode::Retrieve: return mean_h;
    case GoalMode::Interleaved: return p.width;
    case GoalMode::Chain: return mean_h * p.width * p.targets;
  }
  return 0;
}

}  // namespace

std::vector<GeneratedInstance> generate_curriculum(const CurriculumSchedule& schedule,
                                                   std::uint64_t master_seed,
                                                   const GenerateOptions& options) {
  for (const auto& step : schedule.steps) step.validate();
  if (options.max_attempts == 0)
    raise(Errc::InfeasibleParams, "max_attempts must be positive");

  std::vector<GeneratedInstance> out;
  out.reserve(schedule.steps.size());
  std::uint64_t floor_cost = 0;

  for (std::size_t step = 0; step < schedule.steps.size(); ++step) {
    const CurriculumParams& params = schedule.steps[step];
    bool accepted = false;
    for (std::uint32_t attempt = 0; attempt < options.max_attempts; ++attempt) {
      std::uint64_t seed = derive_seed(master_seed, schedule.name, step, attempt);
      ProblemDoc doc = generate_instance(params, seed, schedule.name);
      CostBreakdown cost = optimal_cost(doc);
      if (cost.total < floor_cost) continue;

      GeneratedInstance inst;
      inst.doc = std::move(doc);
      inst.params = params;
      inst.curriculum = schedule.name;
      inst.step_index = static_cast<std::uint32_t>(step);
      inst.seed = seed;
      inst.attempts = attempt + 1;
      inst.cost = cost;
      inst.complexity_axis = complexity_axis_for(params);
      out.push_back(std::move(inst));
      floor_cost = cost.total;
      accepted = true;
      break;
    }
    if (!accepted)
      raise(Errc::RejectionExhausted,
            "step " + std::to_string(step) + " of " + schedule.name + " found no instance with " +
                "cost >= " + std::to_string(floor_cost) + " in " +
                std::to_string(options.max_attempts) + " attempts");
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"grand_challenge", "harvest", "interleaved_harvest",
                                              "high_towers"};
  return names;
}

CurriculumSchedule preset_schedule(std::string_view name) {
  CurriculumSchedule s;
  s.name = std::string(name);
  if (name == "grand_challenge") {
    // W, S, height range; all axes scale together.
    static const std::uint32_t rows[][4] = {
        {6, 2, 5, 10},   {9, 3, 6, 11},   {11, 3, 8, 13},  {14, 4, 9, 14},  {17, 4, 11, 16},
        {20, 5, 12, 17}, {23, 6, 14, 19}, {26, 6, 15, 20}, {29, 7, 17, 22}, {32, 7, 19, 24},
        {35, 8, 20, 25}, {37, 9, 22, 27}, {40, 9, 23, 28}, {43, 10, 25, 30}, {46, 10, 26, 31},
        {49, 11, 28, 33}, {52, 12, 29, 34}, {55, 12, 31, 36}, {58, 13, 32, 37}, {61, 13, 34, 39},
        {63, 14, 36, 41}, {66, 15, 37, 42}, {69, 15, 39, 44}, {72, 16, 40, 45}, {75, 16, 42, 47},
        {78, 17, 43, 48}, {81, 18, 45, 50}, {84, 18, 46, 51}, {87, 19, 48, 53}, {90, 20, 50, 55},
        {92, 20, 51, 56}, {95, 21, 53, 58}, {98, 21, 54, 59}};
    for (const auto& r : rows)
      s.steps.push_back({r[0], r[2], r[3], r[1], GoalMode::Chain});
  } else if (name == "harvest") {
    for (std::uint32_t w = 4; w <= 220; w += 4)
      s.steps.push_back({w, 5, 8, w, GoalMode::Chain});
  } else if (name == "interleaved_harvest") {
    for (std::uint32_t w = 2; w <= 100; w += 2)
      s.steps.push_back({w, 5, 8, 2 * w, GoalMode::Interleaved});
  } else if (name == "high_towers") {
    for (std::uint32_t h = 8; h <= 988; h += 20)
      s.steps.push_back({12, h, h + 5, 1, GoalMode::Retrieve});
  } else {
    raise(Errc::ConfigError, "unknown curriculum " + std::string(name));
  }
  return s;
}

}  // namespace pstar
