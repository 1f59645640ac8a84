#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pstar/generator.hpp"
#include "pstar/graph.hpp"
#include "pstar/harness.hpp"
#include "pstar/pddl.hpp"
#include "pstar/planner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pstar;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::Io, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::Io, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) raise(Errc::Io, "short write to " + path.string());
}

// 2 for malformed input or configuration, 1 for everything operational.
int error_exit_code(Errc c) {
  switch (c) {
    case Errc::Syntax:
    case Errc::UnknownPredicate:
    case Errc::UndeclaredObject:
    case Errc::ArityMismatch:
    case Errc::UnknownOp:
    case Errc::DegenerateGoal:
    case Errc::InfeasibleParams:
    case Errc::ConfigError:
      return 2;
    default:
      return 1;
  }
}

void emit(const std::string& format, const json& machine, const std::string& human) {
  if (format == "json")
    std::cout << machine.dump() << "\n";
  else
    std::cout << human;
}

std::string problem_text_of(const ProblemDoc& doc) {
  return doc.source_text.empty() ? emit_problem(doc) : doc.source_text;
}

GoalMode goal_mode_from_name(const std::string& name) {
  if (name == "chain") return GoalMode::Chain;
  if (name == "retrieve") return GoalMode::Retrieve;
  if (name == "interleaved") return GoalMode::Interleaved;
  raise(Errc::ConfigError, "unknown goal mode " + name);
}

CurriculumSchedule schedule_from_json_file(const fs::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    raise(Errc::ConfigError, "schedule file is not a JSON object");
  CurriculumSchedule s;
  s.name = j.value("name", std::string("custom"));
  if (!j.contains("steps") || !j["steps"].is_array() || j["steps"].empty())
    raise(Errc::ConfigError, "schedule needs a non-empty steps array");
  for (const auto& st : j["steps"]) {
    if (!st.is_object()) raise(Errc::ConfigError, "schedule steps must be objects");
    CurriculumParams p;
    p.width = st.value("width", 1u);
    p.height_min = st.value("height_min", 1u);
    p.height_max = st.value("height_max", p.height_min);
    p.targets = st.value("targets", 1u);
    p.goal_mode = goal_mode_from_name(st.value("goal_mode", "chain"));
    p.validate();
    s.steps.push_back(p);
  }
  return s;
}

int run_generate(const std::string& curriculum, const std::string& params_file,
                 std::string out_dir, std::uint64_t seed, const std::string& format) {
  CurriculumSchedule schedule;
  if (!params_file.empty())
    schedule = schedule_from_json_file(params_file);
  else if (!curriculum.empty())
    schedule = preset_schedule(curriculum);
  else
    raise(Errc::ConfigError, "either --curriculum or --params is required");

  if (out_dir.empty()) out_dir = (fs::path("out") / schedule.name).string();
  std::vector<GeneratedInstance> instances = generate_curriculum(schedule, seed);

  fs::create_directories(out_dir);
  std::uint64_t c_min = 0, c_max = 0;
  std::string manifest;
  std::string prefix = schedule.name + "_";
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const GeneratedInstance& g = instances[i];
    std::string suffix = g.doc.name.rfind(prefix, 0) == 0 ? g.doc.name.substr(prefix.size())
                                                          : g.doc.name;
    char idx[16];
    std::snprintf(idx, sizeof idx, "%03zu", i);
    fs::path file = fs::path(out_dir) / (std::string(idx) + "_" + suffix + ".pddl");
    write_file(file, problem_text_of(g.doc));

    json row{{"index", i},
             {"name", g.doc.name},
             {"file", file.filename().string()},
             {"curriculum", g.curriculum},
             {"step_index", g.step_index},
             {"width", g.params.width},
             {"height_min", g.params.height_min},
             {"height_max", g.params.height_max},
             {"targets", g.params.targets},
             {"goal_mode", std::string(goal_mode_name(g.params.goal_mode))},
             {"seed", g.seed},
             {"master_seed", seed},
             {"attempts", g.attempts},
             {"c_opt", g.cost.total},
             {"complexity_axis", g.complexity_axis}};
    manifest += row.dump() + "\n";

    c_min = i == 0 ? g.cost.total : std::min(c_min, g.cost.total);
    c_max = std::max(c_max, g.cost.total);
  }
  fs::path manifest_path = fs::path(out_dir) / "manifest.jsonl";
  write_file(manifest_path, manifest);

  char line[256];
  std::snprintf(line, sizeof line, "instances=%zu c_opt_min=%llu c_opt_max=%llu out=%s\n",
                instances.size(), static_cast<unsigned long long>(c_min),
                static_cast<unsigned long long>(c_max), out_dir.c_str());
  emit(format,
       json{{"command", "generate"},
            {"curriculum", schedule.name},
            {"instances", instances.size()},
            {"c_opt_min", c_min},
            {"c_opt_max", c_max},
            {"out", out_dir},
            {"manifest", manifest_path.string()},
            {"seed", seed}},
       line);
  return 0;
}

int run_solve(const std::string& problem_path, const std::string& plan_out, bool oracle,
              std::uint64_t max_states, double max_seconds, const std::string& format) {
  ProblemDoc doc = parse_problem(read_file(problem_path));
  PlanDoc plan;
  std::uint64_t c_opt = 0;
  if (oracle) {
    plan = uniform_cost_oracle(doc, SearchLimits{max_states, max_seconds});
    c_opt = plan.length();
  } else {
    c_opt = optimal_cost(doc).total;
    GoalShape shape = classify_goal(doc.initial_state(), doc.goal);
    plan = shape == GoalShape::Interleaved ? synthesize_interleaved_plan(doc)
                                           : synthesize_optimal_plan(doc);
  }
  fs::path out = plan_out.empty() ? fs::path(problem_path).replace_extension(".plan")
                                  : fs::path(plan_out);
  write_file(out, emit_plan(plan));

  char line[160];
  std::snprintf(line, sizeof line, "c_opt=%llu plan_len=%zu\n",
                static_cast<unsigned long long>(c_opt), plan.length());
  emit(format,
       json{{"command", "solve"},
            {"c_opt", c_opt},
            {"plan_len", plan.length()},
            {"plan", out.string()},
            {"oracle", oracle}},
       line);
  return 0;
}

int run_validate(const std::string& problem_path, const std::string& plan_path, bool lenient,
                 const std::string& format) {
  ProblemDoc doc = parse_problem(read_file(problem_path));
  PlanDoc plan = parse_plan(read_file(plan_path), lenient ? ParseMode::Lenient : ParseMode::Strict);
  ExecutionResult result = execute_plan(doc.initial_state(), plan.steps, doc.goal);
  if (result.valid) {
    char line[64];
    std::snprintf(line, sizeof line, "VALID len=%zu\n", plan.length());
    emit(format, json{{"command", "validate"}, {"valid", true}, {"len", plan.length()}}, line);
    return 0;
  }
  // 1-based failing action, or the plan length when the goal is the problem.
  std::size_t step = result.failure ? result.failure->step + 1 : result.steps_executed;
  std::string reason = result.reason();
  emit(format,
       json{{"command", "validate"}, {"valid", false}, {"step", step}, {"reason", reason}},
       "INVALID step=" + std::to_string(step) + " reason=" + reason + "\n");
  return 1;
}

int run_translate(const std::string& problem_in, const std::string& plan_in,
                  const std::string& to, const std::string& out_path,
                  const std::string& format) {
  if (problem_in.empty() == plan_in.empty())
    raise(Errc::ConfigError, "exactly one of --problem or --plan is required");

  std::string result;
  if (!problem_in.empty()) {
    std::string text = read_file(problem_in);
    if (to == "graph") {
      result = emit_graph_problem(parse_problem(text));
    } else {
      // The graph text carries no problem name; reuse the file stem.
      GraphProblem gp = parse_graph_problem(text);
      result = problem_text_of(doc_from_graph_problem(gp, fs::path(problem_in).stem().string()));
    }
  } else {
    std::string text = read_file(plan_in);
    if (to == "graph")
      result = emit_graph_ops(translate_plan(parse_plan(text, ParseMode::Strict)));
    else
      result = emit_plan(translate_graph_plan(parse_graph_plan(text, ParseMode::Strict)));
  }

  if (out_path.empty()) {
    if (format == "json")
      std::cout << json{{"command", "translate"}, {"to", to}, {"text", result}}.dump() << "\n";
    else
      std::cout << result;
    return 0;
  }
  write_file(out_path, result);
  emit(format,
       json{{"command", "translate"}, {"to", to}, {"out", out_path}, {"bytes", result.size()}},
       "wrote " + out_path + " (" + std::to_string(result.size()) + " bytes)\n");
  return 0;
}

int run_evaluate(const std::string& manifest_path, const std::string& config_path,
                 const std::string& repr_name, const std::string& out_path, bool no_resume,
                 const std::string& format) {
  ProducerConfig config = ProducerConfig::from_json_file(config_path);
  Representation repr = representation_from_name(repr_name);

  std::vector<EvalInstance> instances;
  fs::path base = fs::path(manifest_path).parent_path();
  std::istringstream lines(read_file(manifest_path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object() || !row.contains("file"))
      raise(Errc::Syntax,
            manifest_path + ":" + std::to_string(line_no) + ": malformed manifest row");
    EvalInstance inst;
    inst.problem_path = base / fs::path(row["file"].get<std::string>());
    inst.doc = parse_problem(read_file(inst.problem_path));
    inst.c_opt = row.value("c_opt", std::uint64_t{0});
    inst.curriculum = row.value("curriculum", "");
    inst.complexity_axis = row.value("complexity_axis", 0.0);
    instances.push_back(std::move(inst));
  }

  EvaluateOptions opts;
  opts.representation = repr;
  opts.records_path = out_path;
  opts.resume = !no_resume;
  std::vector<EvalRecord> records = evaluate(instances, config, opts);

  std::size_t valid = 0, optimal = 0;
  for (const EvalRecord& r : records) {
    if (r.valid) ++valid;
    if (r.valid && r.gap && r.gap->num == 0 && !r.gap->is_infinite()) ++optimal;
  }
  char human[256];
  std::snprintf(human, sizeof human, "records=%zu valid=%zu optimal=%zu out=%s\n",
                records.size(), valid, optimal, out_path.c_str());
  emit(format,
       json{{"command", "evaluate"},
            {"records", records.size()},
            {"valid", valid},
            {"optimal", optimal},
            {"producer", config.id},
            {"representation", repr_name},
            {"out", out_path}},
       human);
  return 0;
}

int run_report(const std::string& records_path, const std::string& out_dir,
               const std::string& format) {
  std::vector<EvalRecord> records = load_records(records_path);
  Summary s = summarize(records);

  fs::path dir = out_dir.empty() ? fs::path(records_path).parent_path() : fs::path(out_dir);
  if (dir.empty()) dir = ".";
  fs::path summary_path = dir / "summary.txt";
  fs::path csv_path = dir / "plot_data.csv";
  std::string rendered = render_summary(s);
  write_file(summary_path, rendered);
  write_file(csv_path, plot_data_csv(records));

  json groups = json::array();
  for (const GroupSummary& g : s.groups) {
    json jg{{"curriculum", g.curriculum}, {"producer", g.producer},
            {"representation", g.representation}, {"n", g.count},
            {"valid", g.valid_count}, {"optimal", g.optimal_count}};
    if (g.gap_min) {
      jg["gap_min"] = g.gap_min->text();
      jg["gap_median"] = g.gap_median->text();
      jg["gap_max"] = g.gap_max->text();
    }
    groups.push_back(jg);
  }
  json jfit = nullptr;
  if (s.fit)
    jfit = json{{"slope", s.fit->slope}, {"intercept", s.fit->intercept}, {"r2", s.fit->r2},
                {"n", s.fit->n}};
  emit(format,
       json{{"command", "report"},
            {"instances", s.count},
            {"valid", s.valid_count},
            {"optimal", s.optimal_count},
            {"groups", groups},
            {"fit", jfit},
            {"summary", summary_path.string()},
            {"csv", csv_path.string()}},
       rendered + "summary=" + summary_path.string() + " csv=" + csv_path.string() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"P*-structured blocksworld benchmark toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string format = "text";
  app.add_option("--seed", seed, "master seed for anything randomized");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "json"}));

  std::string preset_list;
  for (const std::string& n : preset_names()) {
    if (!preset_list.empty()) preset_list += ", ";
    preset_list += n;
  }

  auto* gen = app.add_subcommand("generate", "sample a curriculum into files plus a manifest");
  gen->fallthrough();
  std::string gen_curriculum, gen_params, gen_out;
  gen->add_option("--curriculum", gen_curriculum, "preset: " + preset_list);
  gen->add_option("--params", gen_params, "JSON schedule file replacing the preset");
  gen->add_option("--out", gen_out, "output directory (default out/<curriculum>)");

  auto* solve = app.add_subcommand("solve", "synthesize an optimal plan for a problem");
  solve->fallthrough();
  std::string solve_problem, solve_plan;
  bool solve_oracle = false;
  std::uint64_t solve_max_states = SearchLimits{}.max_states;
  double solve_max_seconds = SearchLimits{}.max_seconds;
  solve->add_option("--problem", solve_problem, "problem file")->required();
  solve->add_option("--plan", solve_plan,
                    "plan output path (default: problem path with its extension replaced by .plan)");
  solve->add_flag("--oracle", solve_oracle, "use uniform-cost search instead of the synthesizer");
  solve->add_option("--max-states", solve_max_states, "oracle state cap");
  solve->add_option("--max-seconds", solve_max_seconds, "oracle time cap");

  auto* validate = app.add_subcommand("validate", "check a plan against a problem");
  validate->fallthrough();
  std::string val_problem, val_plan;
  bool val_lenient = false;
  validate->add_option("--problem", val_problem, "problem file")->required();
  validate->add_option("--plan", val_plan, "plan file")->required();
  validate->add_flag("--lenient", val_lenient, "extract actions from noisy text");

  auto* translate = app.add_subcommand("translate", "convert problems or plans between formats");
  translate->fallthrough();
  std::string tr_problem, tr_plan, tr_to, tr_out;
  translate->add_option("--problem", tr_problem, "problem file to convert");
  translate->add_option("--plan", tr_plan, "plan file to convert");
  translate->add_option("--to", tr_to, "target format")
      ->required()
      ->check(CLI::IsMember({"graph", "blocks"}));
  translate->add_option("--out", tr_out, "output path (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "run a plan producer over a manifest");
  evaluate->fallthrough();
  std::string ev_manifest, ev_config, ev_repr = "blocksworld", ev_out;
  bool ev_no_resume = false;
  evaluate->add_option("--manifest", ev_manifest, "manifest.jsonl from generate")->required();
  evaluate->add_option("--producer-config", ev_config, "producer config JSON")->required();
  evaluate->add_option("--representation", ev_repr, "prompt and plan format")
      ->check(CLI::IsMember({"blocksworld", "graph"}));
  evaluate->add_option("--out", ev_out, "records JSONL path")->required();
  evaluate->add_flag("--no-resume", ev_no_resume, "re-run instances already in the records file");

  auto* report = app.add_subcommand("report", "summarize evaluation records");
  report->fallthrough();
  std::string rep_records, rep_out;
  report->add_option("--records", rep_records, "records JSONL path")->required();
  report->add_option("--out", rep_out, "report directory (default records directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_generate(gen_curriculum, gen_params, gen_out, seed, format);
    if (solve->parsed())
      return run_solve(solve_problem, solve_plan, solve_oracle, solve_max_states,
                       solve_max_seconds, format);
    if (validate->parsed()) return run_validate(val_problem, val_plan, val_lenient, format);
    if (translate->parsed()) return run_translate(tr_problem, tr_plan, tr_to, tr_out, format);
    if (evaluate->parsed())
      return run_evaluate(ev_manifest, ev_config, ev_repr, ev_out, ev_no_resume, format);
    if (report->parsed()) return run_report(rep_records, rep_out, format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    // evaluate treats a bad producer config as operational, not usage
    if (evaluate->parsed() && e.code() == Errc::ConfigError) return 1;
    return error_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
