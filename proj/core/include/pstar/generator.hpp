#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pstar/pddl.hpp"
#include "pstar/planner.hpp"

namespace pstar {

enum class GoalMode { Chain, Retrieve, Interleaved };

std::string_view goal_mode_name(GoalMode m);

// One sampling configuration: W towers, heights uniform in
// [height_min, height_max], S target blocks arranged per goal_mode.
struct CurriculumParams {
  std::uint32_t width = 1;
  std::uint32_t height_min = 1;
  std::uint32_t height_max = 1;
  std::uint32_t targets = 1;
  GoalMode goal_mode = GoalMode::Chain;

  bool operator==(const CurriculumParams&) const = default;

  // Throws InfeasibleParams when no instance can satisfy the shape:
  // chain needs targets <= width (one tower each), retrieve needs exactly
  // one target, interleaved needs targets == 2*width and height_min >= 3.
  void validate() const;
};

struct CurriculumSchedule {
  std::string name;
  std::vector<CurriculumParams> steps;
};

struct GenerateOptions {
  std::uint32_t max_attempts = 10'000;
};

struct GeneratedInstance {
  ProblemDoc doc;
  CurriculumParams params;
  std::string curriculum;
  std::uint32_t step_index = 0;
  std::uint64_t seed = 0;     // the accepted draw's instance seed
  std::uint32_t attempts = 1; // draws consumed by rejection sampling
  CostBreakdown cost;
  double complexity_axis = 0; // curriculum-specific difficulty coordinate
};

// SplitMix64 finalizer; the basis for all derived seeds.
std::uint64_t mix64(std::uint64_t x);

// Instance seed for (master seed, curriculum name, step, attempt). Stable
// across platforms and runs.
std::uint64_t derive_seed(std::uint64_t master, std::string_view curriculum, std::uint64_t step,
                          std::uint64_t attempt);

// Deterministic instance construction: tower heights, a Fisher-Yates block
// naming permutation, target selection per goal mode, and a scrambled init
// predicate order all come from the seed. The name encodes the parameters:
// <prefix>_h%02d-%02d_w%03d_s%02d.
ProblemDoc generate_instance(const CurriculumParams& params, std::uint64_t seed,
                             std::string_view name_prefix);

// Draws every step of the schedule, redrawing instances (bounded by
// max_attempts) until analytic cost is non-decreasing along the sequence.
// Throws RejectionExhausted naming the failing step.
std::vector<GeneratedInstance> generate_curriculum(const CurriculumSchedule& schedule,
                                                   std::uint64_t master_seed,
                                                   const GenerateOptions& options = {});

// Built-in schedules: grand_challenge, harvest, interleaved_harvest,
// high_towers. preset_schedule throws ConfigError for unknown names.
const std::vector<std::string>& preset_names();
CurriculumSchedule preset_schedule(std::string_view name);

}  // namespace pstar
