#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pstar/generator.hpp"
#include "pstar/graph.hpp"

namespace pstar {

enum class Representation { Blocksworld, Graph };

std::string_view representation_name(Representation r);
Representation representation_from_name(std::string_view name);  // ConfigError

// Exact plan-length overhead relative to the analytic optimum,
// (length - c_opt) / c_opt, kept as a reduced fraction. A zero optimum with a
// nonzero plan is reported as the infinite sentinel (den == 0) rather than an
// error so batch evaluation can keep going.
struct Rational {
  std::int64_t num = 0;
  std::uint64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::uint64_t d);  // reduces; d == 0 is the sentinel

  static Rational infinite() { return Rational(1, 0); }
  bool is_infinite() const { return den == 0; }
  double value() const;
  std::string text() const;  // "2/27", "0", "inf"

  bool operator==(const Rational&) const = default;
  bool operator<(const Rational& other) const;
};

Rational optimality_gap(std::uint64_t plan_length, std::uint64_t c_opt);

// Least-squares line through (c_opt, thinking_tokens) of valid records that
// carry token counts.
struct FitResult {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t n = 0;
};

struct ProducerConfig {
  enum class Kind { BuiltinOptimal, ExternalCommand, HttpEndpoint };

  Kind kind = Kind::BuiltinOptimal;
  std::string id = "builtin";        // label recorded with every result
  std::string command;               // external: executable
  std::vector<std::string> args;     // external: argv entries before the file paths
  std::string url;                   // http: endpoint
  std::string model;                 // http: forwarded in the request body
  double timeout_seconds = 60.0;
  std::uint32_t max_retries = 2;     // transport failures only
  std::uint32_t parallelism = 1;
  std::string credential_env;        // env var holding the bearer token; the
                                     // value never reaches disk or records
  std::string extra_json;            // provider params merged into the body

  static ProducerConfig from_json(std::string_view text);
  static ProducerConfig from_json_file(const std::filesystem::path& path);
  void validate() const;  // ConfigError
};

// Prompt assembly. Sections are stored without trailing newlines; text()
// joins them with the canonical separators of the reference prompts.
struct PromptBundle {
  Representation representation = Representation::Blocksworld;
  std::string domain_text;        // domain definition or graph rule cards
  std::string exemplar_problem;   // rendered exemplar statement
  std::string exemplar_plan;      // rendered exemplar solution
  std::string target_problem;     // rendered target statement

  std::string text() const;
};

// Validates the exemplar solves its own problem (InvalidExemplar otherwise).
PromptBundle build_prompt(const ProblemDoc& target, const ProblemDoc& exemplar,
                          const PlanDoc& exemplar_plan, Representation repr);

// The built-in exemplar pair used when no custom one is supplied.
const ProblemDoc& default_exemplar_problem();
const PlanDoc& default_exemplar_plan();
PromptBundle build_prompt(const ProblemDoc& target, Representation repr);

struct EvalInstance {
  ProblemDoc doc;
  std::uint64_t c_opt = 0;
  std::string curriculum;
  double complexity_axis = 0;
  std::filesystem::path problem_path;  // optional; external producers get it

  static EvalInstance from_generated(const GeneratedInstance& g);
};

struct EvalRecord {
  static constexpr int kSchemaVersion = 1;

  std::string instance;
  std::string curriculum;
  std::string producer;
  std::string representation;
  std::uint64_t c_opt = 0;
  double complexity_axis = 0;
  std::string raw_output;
  std::optional<std::string> parse_mode;       // "strict" or "lenient"
  bool valid = false;
  std::optional<std::uint64_t> plan_length;    // absent when invalid
  std::optional<Rational> gap;                 // absent when invalid
  std::optional<std::uint64_t> thinking_tokens;
  std::uint64_t wall_time_ms = 0;
  std::optional<std::string> failure;          // why the attempt was invalid
};

std::string record_to_json(const EvalRecord& r);
EvalRecord record_from_json(std::string_view line);

struct EvaluateOptions {
  Representation representation = Representation::Blocksworld;
  std::filesystem::path records_path;  // JSONL sink, appended record by record
  bool resume = true;                  // skip instances already in the sink
  std::function<void(const EvalRecord&)> on_record;
};

// Runs the producer over every instance: prompt (external producers), call
// with retries and backoff on transport failures, parse strict-then-lenient,
// validate against core semantics, score. Per-instance failures become
// records, never exceptions. Records are committed in instance order
// regardless of parallelism. Returns records for all instances, including
// ones restored from the sink on resume.
std::vector<EvalRecord> evaluate(const std::vector<EvalInstance>& instances,
                                 const ProducerConfig& producer, const EvaluateOptions& options);

FitResult fit_tokens_per_step(const std::vector<EvalRecord>& records);  // InsufficientData

struct GroupSummary {
  std::string curriculum;
  std::string producer;
  std::string representation;
  std::size_t count = 0;
  std::size_t valid_count = 0;
  std::size_t optimal_count = 0;
  std::optional<Rational> gap_min, gap_median, gap_max;  // over valid records
};

struct Summary {
  std::size_t count = 0;
  std::size_t valid_count = 0;
  std::size_t optimal_count = 0;
  std::vector<GroupSummary> groups;
  std::optional<FitResult> fit;  // present when token data suffices
};

Summary summarize(const std::vector<EvalRecord>& records);
std::string render_summary(const Summary& s);
std::string plot_data_csv(const std::vector<EvalRecord>& records);

std::vector<EvalRecord> load_records(const std::filesystem::path& path);

}  // namespace pstar
