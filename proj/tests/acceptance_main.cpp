// Acceptance gate: one criterion per line, [PASS]/[FAIL], nonzero exit on any
// failure. Each criterion enforces its own wall-clock budget.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "golden.hpp"
#include "helpers.hpp"
#include "pstar/fixtures.hpp"
#include "pstar/generator.hpp"
#include "pstar/graph.hpp"
#include "pstar/harness.hpp"
#include "pstar/planner.hpp"

using namespace pstar;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

int failures = 0;

void criterion(int num, const std::string& name, double budget_seconds,
               const std::function<void()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  std::string verdict = "[PASS]";
  std::string note;
  try {
    body();
  } catch (const std::exception& e) {
    verdict = "[FAIL]";
    note = std::string(" -- ") + e.what();
  }
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (verdict == "[PASS]" && seconds > budget_seconds) {
    verdict = "[FAIL]";
    note = " -- exceeded the " + std::to_string(budget_seconds) + "s budget";
  }
  if (verdict == "[FAIL]") ++failures;
  std::printf("%s criterion %d: %s (%.2fs)%s\n", verdict.c_str(), num, name.c_str(), seconds,
              note.c_str());
  std::fflush(stdout);
}

fs::path artifact_dir() {
  fs::path dir = "acceptance_out";
  fs::create_directories(dir);
  return dir;
}

// Small chain parameter draws whose instances stay within six blocks and
// three towers so exhaustive search is instant.
CurriculumParams small_chain_params(std::mt19937_64& rng) {
  CurriculumParams p;
  p.goal_mode = GoalMode::Chain;
  p.width = std::uniform_int_distribution<std::uint32_t>(2, 3)(rng);
  std::uint32_t h_cap = p.width == 2 ? 3 : 2;
  p.height_max = std::uniform_int_distribution<std::uint32_t>(1, h_cap)(rng);
  p.height_min = std::uniform_int_distribution<std::uint32_t>(1, p.height_max)(rng);
  p.targets = std::uniform_int_distribution<std::uint32_t>(2, p.width)(rng);
  p.validate();
  return p;
}

void check_structure(const GeneratedInstance& g) {
  WorldState init = g.doc.initial_state();
  auto tower_of = [&](BlockId b) {
    for (std::size_t t = 0; t < init.towers.size(); ++t)
      for (BlockId x : init.towers[t])
        if (x == b) return t;
    throw CheckFailure(g.doc.name + ": goal block " + std::to_string(b) + " is not located");
  };
  expect(!init.held.has_value(), g.doc.name + ": generated instances never start mid-move");
  expect(init.towers.size() == g.params.width, g.doc.name + ": tower count");
  for (const auto& tower : init.towers)
    expect(tower.size() >= g.params.height_min && tower.size() <= g.params.height_max,
           g.doc.name + ": tower height out of range");

  switch (g.params.goal_mode) {
    case GoalMode::Chain: {
      const auto& chain = g.doc.goal.chains.at(0);
      expect(chain.size() == g.params.targets, g.doc.name + ": target count");
      std::vector<bool> used(init.towers.size(), false);
      for (BlockId b : chain) {
        std::size_t t = tower_of(b);
        expect(!used[t], g.doc.name + ": two chain targets share a tower");
        used[t] = true;
      }
      std::size_t base_tower = tower_of(chain[0]);
      expect(init.towers[base_tower][0] == chain[0], g.doc.name + ": base target not on the table");
      break;
    }
    case GoalMode::Retrieve:
      expect(g.doc.goal.kind == GoalSpec::Kind::Retrieve, g.doc.name + ": goal kind");
      tower_of(g.doc.goal.target);
      break;
    case GoalMode::Interleaved: {
      const auto& chain = g.doc.goal.chains.at(0);
      std::size_t n = init.towers.size();
      expect(chain.size() == 2 * n, g.doc.name + ": interleaved target count");
      for (std::size_t t = 0; t < n; ++t) {
        BlockId deep = chain[t];
        BlockId shallow = chain[n + t];
        std::size_t tower = tower_of(deep);
        expect(tower_of(shallow) == tower, g.doc.name + ": pair split across towers");
        expect(depth(init, deep) > depth(init, shallow),
               g.doc.name + ": deep target is not below its partner");
      }
      break;
    }
  }
}

}  // namespace

int main() {
  criterion(1, "analytic cost equals exhaustive search on small chain goals", 60, [] {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 500; ++i) {
      CurriculumParams p = small_chain_params(rng);
      ProblemDoc doc = generate_instance(p, rng(), "c1");
      std::uint64_t formula = optimal_cost(doc).total;
      PlanDoc best = uniform_cost_oracle(doc, SearchLimits{});
      expect(formula == best.length(),
             doc.name + ": formula " + std::to_string(formula) + " vs oracle " +
                 std::to_string(best.length()));
    }
  });

  criterion(2, "retrieve cost is 2*depth+1 against exhaustive search", 60, [] {
    std::mt19937_64 rng(102);
    for (int i = 0; i < 200; ++i) {
      CurriculumParams p;
      p.goal_mode = GoalMode::Retrieve;
      p.targets = 1;
      p.width = std::uniform_int_distribution<std::uint32_t>(1, 3)(rng);
      p.height_max = std::uniform_int_distribution<std::uint32_t>(1, 2)(rng);
      p.height_min = std::uniform_int_distribution<std::uint32_t>(1, p.height_max)(rng);
      p.validate();
      ProblemDoc doc = generate_instance(p, rng(), "c2");
      std::uint64_t d = depth(doc.initial_state(), doc.goal.target);
      PlanDoc best = uniform_cost_oracle(doc, SearchLimits{});
      expect(best.length() == 2 * d + 1,
             doc.name + ": oracle " + std::to_string(best.length()) + " vs 2*" +
                 std::to_string(d) + "+1");
      expect(optimal_cost(doc).total == best.length(), doc.name + ": formula disagrees");
    }
  });

  criterion(3, "grand-challenge fixture: cost 22, plans, byte-exact prompts", 5, [] {
    ProblemDoc doc = parse_problem(golden::kGrandChallengeProblem);
    expect(optimal_cost(doc).total == 22, "analytic cost is not 22");

    PlanDoc plan = synthesize_optimal_plan(doc);
    expect(plan.length() == 22, "synthesized plan is not 22 steps");
    expect(execute_plan(doc.initial_state(), plan.steps, doc.goal).valid,
           "synthesized plan does not validate");

    // the reference answer, given as a graph op sequence, maps to the same plan
    std::vector<GraphOp> expected_ops =
        parse_graph_plan(golden::kGrandChallengeGraphAnswer, ParseMode::Strict);
    PlanDoc reference = translate_graph_plan(expected_ops);
    expect(execute_plan(doc.initial_state(), reference.steps, doc.goal).valid,
           "reference answer does not validate");
    expect(translate_plan(reference) == expected_ops, "translation is not a bijection");
    expect(emit_plan(reference) == emit_plan(plan), "synthesized plan differs from the reference");

    GraphState g = to_graph(doc.initial_state());
    for (const GraphOp& op : expected_ops) g = apply_graph_op(g, op);
    expect(graph_satisfies(g, doc.goal), "op sequence does not reach the goal graph");

    expect(build_prompt(doc, Representation::Blocksworld).text() == golden::kBlocksPrompt,
           "blocks prompt is not byte-exact");
    expect(build_prompt(doc, Representation::Graph).text() == golden::kGraphPrompt,
           "graph prompt is not byte-exact");
  });

  criterion(4, "four-block exemplar: six optimal steps and their graph form", 5, [] {
    const ProblemDoc& doc = default_exemplar_problem();
    const PlanDoc& plan = default_exemplar_plan();
    expect(plan.length() == 6, "exemplar plan is not 6 steps");
    expect(execute_plan(doc.initial_state(), plan.steps, doc.goal).valid,
           "exemplar plan does not validate");
    expect(uniform_cost_oracle(doc, SearchLimits{}).length() == 6, "6 is not optimal");

    std::string_view prompt = golden::kGraphPrompt;
    auto start = prompt.find("Solution:\n");
    auto stop = prompt.find("\n\nYour task:");
    expect(start != std::string_view::npos && stop != std::string_view::npos && start < stop,
           "prompt markers missing");
    std::string block(prompt.substr(start + 10, stop + 1 - (start + 10)));
    expect(translate_plan(plan) == parse_graph_plan(block, ParseMode::Strict),
           "exemplar translation differs from the reference solution block");
  });

  criterion(5, "graph ops commute with actions on 1000 random pairs", 30, [] {
    std::mt19937_64 rng(105);
    int checked = 0;
    while (checked < 1000) {
      std::uint32_t n = std::uniform_int_distribution<std::uint32_t>(2, 18)(rng);
      WorldState s = testutil::random_state(rng, n, 5, true);
      auto actions = testutil::legal_actions(s);
      if (actions.empty()) continue;
      Action a = actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)];
      expect(to_graph(apply(s, a)) == apply_graph_op(to_graph(s), to_graph_op(a)),
             "commutation mismatch");
      ++checked;
    }
  });

  criterion(6, "curriculum integrity on every preset at a fixed seed", 600, [] {
    for (const std::string& preset : preset_names()) {
      std::vector<GeneratedInstance> run = generate_curriculum(preset_schedule(preset), 2026);
      expect(!run.empty(), preset + ": empty curriculum");
      std::uint64_t prev = 0;
      std::vector<EvalInstance> standard;
      for (const GeneratedInstance& g : run) {
        expect(g.cost.total >= prev, g.doc.name + ": difficulty regressed");
        prev = g.cost.total;
        expect(g.cost.total == optimal_cost(g.doc).total, g.doc.name + ": recorded cost drifted");
        check_structure(g);
        if (g.params.goal_mode != GoalMode::Interleaved)
          standard.push_back(EvalInstance::from_generated(g));
      }
      if (standard.empty()) continue;
      ProducerConfig builtin;
      builtin.parallelism = 4;
      for (const EvalRecord& r : evaluate(standard, builtin, EvaluateOptions{})) {
        expect(r.valid, r.instance + ": builtin produced an invalid plan");
        expect(r.gap == Rational(0, 1), r.instance + ": builtin plan is not optimal");
      }
    }
  });

  criterion(7, "interleaved synthesis validates; oracle brackets the length", 300, [] {
    std::mt19937_64 rng(107);
    std::ofstream report(artifact_dir() / "interleaved_oracle_report.txt");
    report << "oracle length vs the closed-form figure sum(2*d_deep)+2N on instances small\n"
              "enough for exhaustive search. Whether the figure equals the optimum is left\n"
              "open on purpose: this run only asserts the synthesized plan falls inside\n"
              "[oracle, sum(2*d_deep)+4N-2]. figure_hit marks instances where the oracle\n"
              "equals the figure. Columns: instance N sum2d figure bound oracle synthesized\n"
              "figure_hit\n\n";
    std::size_t oracled = 0, figure_hits = 0;
    for (int i = 0; i < 100; ++i) {
      CurriculumParams p;
      p.goal_mode = GoalMode::Interleaved;
      if (i < 60) {
        p.width = std::uniform_int_distribution<std::uint32_t>(1, 2)(rng);
        p.height_min = 3;
        p.height_max = std::uniform_int_distribution<std::uint32_t>(3, 4)(rng);
      } else {
        p.width = std::uniform_int_distribution<std::uint32_t>(2, 4)(rng);
        p.height_min = 3;
        p.height_max = std::uniform_int_distribution<std::uint32_t>(3, 5)(rng);
      }
      p.targets = 2 * p.width;
      p.validate();
      ProblemDoc doc = generate_instance(p, rng(), "c7");

      PlanDoc plan = synthesize_interleaved_plan(doc);
      expect(execute_plan(doc.initial_state(), plan.steps, doc.goal).valid,
             doc.name + ": interleaved plan does not validate");

      WorldState init = doc.initial_state();
      const auto& chain = doc.goal.chains.at(0);
      std::size_t n = chain.size() / 2;
      std::uint64_t sum2d = 0;
      for (std::size_t t = 0; t < n; ++t) sum2d += 2 * depth(init, chain[t]);
      std::uint64_t figure = sum2d + 2 * n;
      std::uint64_t bound = sum2d + 4 * n - 2;
      expect(plan.length() <= bound, doc.name + ": synthesized plan exceeds the bound");

      bool oracle_sized = p.width <= 2 && p.height_max <= 4;
      if (!oracle_sized) continue;
      ++oracled;
      PlanDoc best = uniform_cost_oracle(doc, SearchLimits{});
      expect(plan.length() >= best.length(), doc.name + ": plan beats the oracle?");
      if (best.length() == figure) ++figure_hits;
      report << doc.name << " " << n << " " << sum2d << " " << figure << " " << bound << " "
             << best.length() << " " << plan.length() << " "
             << (best.length() == figure ? "yes" : "no") << "\n";
    }
    report << "\noracled " << oracled << " instances; the figure matched the oracle on "
           << figure_hits << " of them\n";
    expect(oracled >= 20, "too few instances were small enough for the oracle");
  });

  criterion(8, "gap arithmetic, token fit, and ingested fixture records", 60, [] {
    expect(optimality_gap(116, 108) == Rational(8, 108), "gap(116,108) != 8/108");
    expect(optimality_gap(260, 152) == Rational(108, 152), "gap(260,152) != 108/152");

    // exact synthetic line: 47 tokens per step
    std::vector<EvalRecord> line;
    for (std::uint64_t c : {6, 10, 22, 54, 108, 152}) {
      EvalRecord r;
      r.instance = "fit-" + std::to_string(c);
      r.curriculum = "synthetic";
      r.producer = "fixture";
      r.representation = "blocksworld";
      r.c_opt = c;
      r.valid = true;
      r.plan_length = c;
      r.gap = Rational(0, 1);
      r.thinking_tokens = 47 * c + 311;
      line.push_back(r);
    }
    FitResult fit = fit_tokens_per_step(line);
    expect(std::abs(fit.slope - 47.0) < 1e-9, "slope is off");
    expect(std::abs(fit.r2 - 1.0) < 1e-9, "r2 is off");

    // Published measurements (16 of 33 hardest instances solved, ~47
    // tokens/step) arrive as data, not as claims this code can re-measure:
    // fixture records flow through persistence and reporting untouched.
    fs::path records_path = artifact_dir() / "fixture_records.jsonl";
    {
      std::ofstream out(records_path);
      std::mt19937_64 rng(108);
      for (int i = 0; i < 33; ++i) {
        EvalRecord r;
        r.instance = "gc-fixture-" + std::to_string(i);
        r.curriculum = "grand_challenge";
        r.producer = "published-llm";
        r.representation = "blocksworld";
        r.c_opt = 22 + 2 * (i % 8);
        if (i < 16) {
          r.valid = true;
          r.plan_length = r.c_opt;
          r.gap = Rational(0, 1);
          r.thinking_tokens = 47 * r.c_opt + 200 + (rng() % 40);
        } else {
          r.failure = "reported failure";
        }
        out << record_to_json(r) << "\n";
      }
    }
    std::vector<EvalRecord> loaded = load_records(records_path);
    expect(loaded.size() == 33, "fixture records did not round trip");
    Summary s = summarize(loaded);
    expect(s.count == 33 && s.valid_count == 16 && s.optimal_count == 16,
           "fixture summary is wrong");
    std::string rendered = render_summary(s);
    expect(rendered.find("optimal_rate=48.5%") != std::string::npos, "rate not rendered");
    expect(s.fit && std::abs(s.fit->slope - 47.0) < 2.0, "fixture token fit is not near 47");
    std::ofstream(artifact_dir() / "fixture_summary.txt") << rendered;
  });

  criterion(9, "every single-action deletion invalidates an optimal plan", 60, [] {
    std::mt19937_64 rng(109);
    for (int i = 0; i < 100; ++i) {
      CurriculumParams p;
      if (i % 3 == 0) {
        p.goal_mode = GoalMode::Retrieve;
        p.targets = 1;
        p.width = std::uniform_int_distribution<std::uint32_t>(1, 4)(rng);
        p.height_min = 2;
        p.height_max = std::uniform_int_distribution<std::uint32_t>(2, 4)(rng);
      } else {
        p = small_chain_params(rng);
      }
      p.validate();
      ProblemDoc doc = generate_instance(p, rng(), "c9");
      PlanDoc plan = synthesize_optimal_plan(doc);
      expect(plan.length() > 0, doc.name + ": empty plan");
      for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        std::vector<Action> mutated = plan.steps;
        mutated.erase(mutated.begin() + static_cast<std::ptrdiff_t>(k));
        expect(!execute_plan(doc.initial_state(), mutated, doc.goal).valid,
               doc.name + ": deleting step " + std::to_string(k) + " kept the plan valid");
      }
    }
  });

  criterion(10, "emit/parse identity for problems, plans, and graph text", 60, [] {
    std::mt19937_64 rng(110);
    for (int i = 0; i < 1000; ++i) {
      CurriculumParams p = testutil::random_params(rng);
      ProblemDoc doc = generate_instance(p, rng(), "c10");

      ProblemDoc reparsed = parse_problem(emit_problem(doc));
      expect(reparsed == doc, doc.name + ": problem text round trip");

      PlanDoc plan = p.goal_mode == GoalMode::Interleaved ? synthesize_interleaved_plan(doc)
                                                          : synthesize_optimal_plan(doc);
      expect(parse_plan(emit_plan(plan), ParseMode::Strict) == plan,
             doc.name + ": plan text round trip");

      GraphProblem gp = graph_problem_from_doc(doc);
      expect(parse_graph_problem(emit_graph_problem(doc)) == gp,
             doc.name + ": graph text round trip");
      std::vector<GraphOp> ops = translate_plan(plan);
      expect(parse_graph_plan(emit_graph_ops(ops), ParseMode::Strict) == ops,
             doc.name + ": op text round trip");
    }
  });

  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
