#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pstar/blocks.hpp"

namespace pstar {

// A problem document: declaration order of objects and init predicates is
// preserved exactly. source_text keeps the original bytes when the document
// was parsed (or the emitted text for generated documents) so prompts can
// reproduce a problem byte for byte. Equality ignores source_text.
struct ProblemDoc {
  std::string name;
  std::vector<BlockId> objects;
  std::vector<Predicate> init;
  GoalSpec goal;
  std::string source_text;

  std::size_t block_count() const { return objects.size(); }
  WorldState initial_state() const { return state_from_predicates(init, objects.size()); }

  bool operator==(const ProblemDoc& other) const {
    return name == other.name && objects == other.objects && init == other.init &&
           goal == other.goal;
  }
};

struct PlanDoc {
  std::vector<Action> steps;

  bool operator==(const PlanDoc&) const = default;
  std::size_t length() const { return steps.size(); }
};

enum class ParseMode { Strict, Lenient };

// The domain definition every emitted problem references.
extern const std::string_view kDomainName;

// Emits the problem in the canonical layout. Throws DegenerateGoal when the
// goal has no conjuncts (a single-block chain), since the grammar cannot
// express an empty (and).
std::string emit_problem(const ProblemDoc& doc);

// Parses a problem. Whitespace-tolerant, lowercase keywords required.
// Validates that objects are exactly b1..bN, that init predicates are known,
// well-formed and reference declared objects, that the init set denotes a
// state, and that the goal is a conjunction of on-facts or a single holding.
ProblemDoc parse_problem(std::string_view text);

// One action per line, e.g. "(unstack b1 b4)". Empty text is the empty plan.
std::string emit_plan(const PlanDoc& plan);

// Strict mode accepts only action lines with optional surrounding
// whitespace. Lenient mode additionally skips lines that carry no
// parenthesized action (prose, code fences, list numbering) and reads
// actions embedded in such noise.
PlanDoc parse_plan(std::string_view text, ParseMode mode);

}  // namespace pstar
