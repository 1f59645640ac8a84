#include "pstar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "pstar/fixtures.hpp"
#include "pstar/planner.hpp"

namespace pstar {

using nlohmann::json;

std::string_view representation_name(Representation r) {
  return r == Representation::Blocksworld ? "blocksworld" : "graph";
}

Representation representation_from_name(std::string_view name) {
  if (name == "blocksworld") return Representation::Blocksworld;
  if (name == "graph") return Representation::Graph;
  raise(Errc::ConfigError, "unknown representation " + std::string(name));
}

namespace {

std::uint64_t gcd64(std::uint64_t a, std::uint64_t b) {
  while (b) {
    std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational::Rational(std::int64_t n, std::uint64_t d) : num(n), den(d) {
  if (den == 0) {
    num = num < 0 ? -1 : 1;
    return;
  }
  if (num == 0) {
    den = 1;
    return;
  }
  std::uint64_t g = gcd64(num < 0 ? static_cast<std::uint64_t>(-num)
                                  : static_cast<std::uint64_t>(num),
                          den);
  num /= static_cast<std::int64_t>(g);
  den /= g;
}

double Rational::value() const {
  if (is_infinite()) return num < 0 ? -1e300 : 1e300;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string Rational::text() const {
  if (is_infinite()) return num < 0 ? "-inf" : "inf";
  if (num == 0) return "0";
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

bool Rational::operator<(const Rational& other) const {
  if (is_infinite() || other.is_infinite()) {
    // Order sentinels as signed infinities.
    auto rank = [](const Rational& r) { return r.is_infinite() ? (r.num < 0 ? -1 : 1) : 0; };
    if (rank(*this) != rank(other)) return rank(*this) < rank(other);
    if (rank(*this) != 0) return false;
    return value() < other.value();
  }
  return static_cast<__int128>(num) * static_cast<__int128>(other.den) <
         static_cast<__int128>(other.num) * static_cast<__int128>(den);
}

Rational optimality_gap(std::uint64_t plan_length, std::uint64_t c_opt) {
  if (c_opt == 0) return plan_length == 0 ? Rational(0, 1) : Rational::infinite();
  return Rational(static_cast<std::int64_t>(plan_length) - static_cast<std::int64_t>(c_opt),
                  c_opt);
}

void ProducerConfig::validate() const {
  if (id.empty()) raise(Errc::ConfigError, "producer id must not be empty");
  if (parallelism == 0) raise(Errc::ConfigError, "parallelism must be positive");
  if (timeout_seconds <= 0) raise(Errc::ConfigError, "timeout_seconds must be positive");
  switch (kind) {
    case Kind::BuiltinOptimal:
      break;
    case Kind::ExternalCommand:
      if (command.empty()) raise(Errc::ConfigError, "external producer needs a command");
      break;
    case Kind::HttpEndpoint:
      if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)
        raise(Errc::ConfigError, "http producer needs an http(s) url");
      break;
  }
  if (!extra_json.empty()) {
    json j = json::parse(extra_json, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      raise(Errc::ConfigError, "extra params must be a JSON object");
  }
}

ProducerConfig ProducerConfig::from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    raise(Errc::ConfigError, "producer config is not a JSON object");
  ProducerConfig c;
  std::string kind = j.value("kind", "builtin_optimal");
  if (kind == "builtin_optimal")
    c.kind = Kind::BuiltinOptimal;
  else if (kind == "external_command")
    c.kind = Kind::ExternalCommand;
  else if (kind == "http_endpoint")
    c.kind = Kind::HttpEndpoint;
  else
    raise(Errc::ConfigError, "unknown producer kind " + kind);
  c.id = j.value("id", kind);
  c.command = j.value("command", "");
  if (j.contains("args")) {
    if (!j["args"].is_array()) raise(Errc::ConfigError, "args must be an array of strings");
    for (const auto& a : j["args"]) {
      if (!a.is_string()) raise(Errc::ConfigError, "args must be an array of strings");
      c.args.push_back(a.get<std::string>());
    }
  }
  c.url = j.value("url", "");
  c.model = j.value("model", "");
  c.timeout_seconds = j.value("timeout_seconds", 60.0);
  c.max_retries = j.value("max_retries", 2u);
  c.parallelism = j.value("parallelism", 1u);
  c.credential_env = j.value("credential_env", "");
  if (j.contains("params")) c.extra_json = j["params"].dump();
  c.validate();
  return c;
}

ProducerConfig ProducerConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::Io, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

namespace {

std::string strip_trailing_newlines(std::string_view s) {
  while (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return std::string(s);
}

std::string problem_text(const ProblemDoc& doc) {
  return doc.source_text.empty() ? emit_problem(doc) : doc.source_text;
}

// Exemplar statement in graph terms: plain edge sections, canonical order.
std::string graph_exemplar_statement(const ProblemDoc& doc) {
  GraphState g = to_graph(doc.initial_state());
  std::string out = "INITIAL GRAPH STATE (Edges)\n";
  out += render_graph_edges(g);
  out += "\nGOAL GRAPH PATTERN (Edges)\n";
  GraphProblem gp = graph_problem_from_doc(doc);
  for (const auto& [from, to] : gp.goal)
    out += node_name(from) + " -> " + node_name(static_cast<NodeRef>(to)) + "\n";
  return strip_trailing_newlines(out);
}

// Target statement: the two task sections with init lines in problem order.
std::string graph_target_statement(const ProblemDoc& doc) {
  GraphProblem gp = graph_problem_from_doc(doc);
  std::string out = "### INITIAL GRAPH STATE ###\n";
  for (const GraphLine& line : gp.init) out += line.text() + "\n";
  out += "\n### GOAL GRAPH PATTERN ###\n";
  for (const auto& [from, to] : gp.goal)
    out += node_name(from) + " -> " + node_name(static_cast<NodeRef>(to)) + "\n";
  return strip_trailing_newlines(out);
}

}  // namespace

std::string PromptBundle::text() const {
  std::string out;
  if (representation == Representation::Blocksworld) {
    out += domain_text;
    out += "\n\n";
    out += fixtures::kInstructionAfterDomain;
    out += "\n\n\n**Example**\n\n";
    out += exemplar_problem;
    out += "\n\n";
    out += fixtures::kInstructionExemplar;
    out += "\n";
    out += exemplar_plan;
    out += "\n\n**TASK**\n\n";
    out += target_problem;
    out += "\n";
    out += fixtures::kInstructionFinal;
    out += "\n";
  } else {
    out += domain_text;
    out += "\n\n\nExample Input\n\n";
    out += exemplar_problem;
    out += "\n\nSolution:\n";
    out += exemplar_plan;
    out += "\n\nYour task:\n";
    out += target_problem;
    out += "\n";
  }
  return out;
}

PromptBundle build_prompt(const ProblemDoc& target, const ProblemDoc& exemplar,
                          const PlanDoc& exemplar_plan, Representation repr) {
  ExecutionResult check = execute_plan(exemplar.initial_state(), exemplar_plan.steps,
                                       exemplar.goal);
  if (!check.valid)
    raise(Errc::InvalidExemplar, "exemplar plan does not solve the exemplar problem: " +
                                     check.reason());

  PromptBundle p;
  p.representation = repr;
  if (repr == Representation::Blocksworld) {
    p.domain_text = std::string(fixtures::kDomainText);
    p.exemplar_problem = strip_trailing_newlines(problem_text(exemplar));
    p.exemplar_plan = strip_trailing_newlines(emit_plan(exemplar_plan));
    p.target_problem = strip_trailing_newlines(problem_text(target));
  } else {
    p.domain_text = std::string(kGraphRulesPreamble);
    p.exemplar_problem = graph_exemplar_statement(exemplar);
    p.exemplar_plan = strip_trailing_newlines(emit_graph_ops(translate_plan(exemplar_plan)));
    p.target_problem = graph_target_statement(target);
  }
  return p;
}

const ProblemDoc& default_exemplar_problem() {
  static const ProblemDoc doc = parse_problem(fixtures::kExemplarProblemText);
  return doc;
}

const PlanDoc& default_exemplar_plan() {
  static const PlanDoc plan = parse_plan(fixtures::kExemplarPlanText, ParseMode::Strict);
  return plan;
}

PromptBundle build_prompt(const ProblemDoc& target, Representation repr) {
  return build_prompt(target, default_exemplar_problem(), default_exemplar_plan(), repr);
}

EvalInstance EvalInstance::from_generated(const GeneratedInstance& g) {
  EvalInstance e;
  e.doc = g.doc;
  e.c_opt = g.cost.total;
  e.curriculum = g.curriculum;
  e.complexity_axis = g.complexity_axis;
  return e;
}

std::string record_to_json(const EvalRecord& r) {
  json j;
  j["schema_version"] = EvalRecord::kSchemaVersion;
  j["instance"] = r.instance;
  j["curriculum"] = r.curriculum;
  j["producer"] = r.producer;
  j["representation"] = r.representation;
  j["c_opt"] = r.c_opt;
  j["complexity_axis"] = r.complexity_axis;
  j["raw_output"] = r.raw_output;
  j["parse_mode"] = r.parse_mode ? json(*r.parse_mode) : json(nullptr);
  j["valid"] = r.valid;
  j["plan_length"] = r.plan_length ? json(*r.plan_length) : json(nullptr);
  if (r.gap) {
    j["gap_num"] = r.gap->num;
    j["gap_den"] = r.gap->den;
  } else {
    j["gap_num"] = nullptr;
    j["gap_den"] = nullptr;
  }
  j["thinking_tokens"] = r.thinking_tokens ? json(*r.thinking_tokens) : json(nullptr);
  j["wall_time_ms"] = r.wall_time_ms;
  j["failure"] = r.failure ? json(*r.failure) : json(nullptr);
  return j.dump();
}

EvalRecord record_from_json(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) raise(Errc::Syntax, "malformed record line");
  int version = j.value("schema_version", 0);
  if (version != EvalRecord::kSchemaVersion)
    raise(Errc::Syntax, "unsupported record schema version " + std::to_string(version));
  EvalRecord r;
  r.instance = j.value("instance", "");
  r.curriculum = j.value("curriculum", "");
  r.producer = j.value("producer", "");
  r.representation = j.value("representation", "");
  r.c_opt = j.value("c_opt", std::uint64_t{0});
  r.complexity_axis = j.value("complexity_axis", 0.0);
  r.raw_output = j.value("raw_output", "");
  if (j.contains("parse_mode") && j["parse_mode"].is_string())
    r.parse_mode = j["parse_mode"].get<std::string>();
  r.valid = j.value("valid", false);
  if (j.contains("plan_length") && j["plan_length"].is_number())
    r.plan_length = j["plan_length"].get<std::uint64_t>();
  if (j.contains("gap_num") && j["gap_num"].is_number() && j["gap_den"].is_number()) {
    Rational g;
    g.num = j["gap_num"].get<std::int64_t>();
    g.den = j["gap_den"].get<std::uint64_t>();
    r.gap = g;
  }
  if (j.contains("thinking_tokens") && j["thinking_tokens"].is_number())
    r.thinking_tokens = j["thinking_tokens"].get<std::uint64_t>();
  r.wall_time_ms = j.value("wall_time_ms", std::uint64_t{0});
  if (j.contains("failure") && j["failure"].is_string())
    r.failure = j["failure"].get<std::string>();
  return r;
}

std::vector<EvalRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::Io, "cannot read " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return out;
}

namespace {

struct ProducerResult {
  bool ok = false;
  bool transport_failure = false;  // worth retrying
  std::string text;
  std::optional<std::uint64_t> thinking_tokens;
  std::string error;
};

struct ExecOutput {
  int exit_code = -1;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string out;
  std::string err;
};

ExecOutput run_command(const std::vector<std::string>& argv, double timeout_seconds) {
  ExecOutput result;
  int out_pipe[2], err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    result.spawn_failed = true;
    result.err = "pipe failed";
    return result;
  }
  pid_t pid = fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.err = "fork failed";
    return result;
  }
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }
  close(out_pipe[1]);
  close(err_pipe[1]);

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_seconds));
  struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  bool open_fds[2] = {true, true};
  char buf[4096];
  while (open_fds[0] || open_fds[1]) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      kill(pid, SIGKILL);
      result.timed_out = true;
      break;
    }
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    fds[0].events = open_fds[0] ? POLLIN : 0;
    fds[1].events = open_fds[1] ? POLLIN : 0;
    int rc = poll(fds, 2, std::max(1, wait_ms));
    if (rc <= 0) continue;
    for (int i = 0; i < 2; ++i) {
      if (!open_fds[i] || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
      ssize_t n = read(fds[i].fd, buf, sizeof buf);
      if (n > 0)
        (i == 0 ? result.out : result.err).append(buf, static_cast<std::size_t>(n));
      else
        open_fds[i] = false;
    }
  }
  close(out_pipe[0]);
  close(err_pipe[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!result.timed_out)
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
  return result;
}

struct HttpTarget {
  std::string base;  // scheme://host[:port]
  std::string path;
};

HttpTarget split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t path_at = url.find('/', scheme + 3);
  if (path_at == std::string::npos) return {url, "/"};
  return {url.substr(0, path_at), url.substr(path_at)};
}

class TempWorkspace {
 public:
  TempWorkspace() = default;
  ~TempWorkspace() {
    if (!dir_.empty()) {
      std::error_code ec;
      std::filesystem::remove_all(dir_, ec);
    }
  }

  const std::filesystem::path& dir() {
    std::call_once(once_, [this] {
      auto base = std::filesystem::temp_directory_path();
      for (int i = 0; i < 1000; ++i) {
        auto candidate = base / ("pstar-eval-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter_++));
        std::error_code ec;
        if (std::filesystem::create_directory(candidate, ec)) {
          dir_ = candidate;
          return;
        }
      }
      raise(Errc::Io, "cannot create a temporary directory");
    });
    return dir_;
  }

  std::filesystem::path write(const std::string& name, std::string_view content) {
    auto path = dir() / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::Io, "cannot write " + path.string());
    out << content;
    return path;
  }

 private:
  std::once_flag once_;
  std::filesystem::path dir_;
  static inline std::atomic<int> counter_{0};
};

class ProducerRunner {
 public:
  ProducerRunner(const ProducerConfig& config, Representation repr)
      : config_(config), repr_(repr) {}

  ProducerResult run(const EvalInstance& inst, std::size_t index) {
    switch (config_.kind) {
      case ProducerConfig::Kind::BuiltinOptimal: return run_builtin(inst);
      case ProducerConfig::Kind::ExternalCommand: return run_external(inst, index);
      case ProducerConfig::Kind::HttpEndpoint: return run_http(inst);
    }
    ProducerResult r;
    r.error = "unreachable";
    return r;
  }

 private:
  ProducerResult run_builtin(const EvalInstance& inst) {
    ProducerResult r;
    WorldState init = inst.doc.initial_state();
    GoalShape shape = classify_goal(init, inst.doc.goal);
    PlanDoc plan;
    switch (shape) {
      case GoalShape::StandardChain:
      case GoalShape::Retrieve:
        plan = synthesize_optimal_plan(inst.doc);
        break;
      case GoalShape::Interleaved:
        plan = synthesize_interleaved_plan(inst.doc);
        break;
      case GoalShape::Other:
        r.error = "builtin producer does not handle this goal shape";
        return r;
    }
    r.text = repr_ == Representation::Blocksworld ? emit_plan(plan)
                                                  : emit_graph_ops(translate_plan(plan));
    r.ok = true;
    return r;
  }

  ProducerResult run_external(const EvalInstance& inst, std::size_t index) {
    ProducerResult r;
    std::filesystem::path domain = domain_path();
    std::filesystem::path problem = inst.problem_path;
    if (problem.empty() || repr_ == Representation::Graph) {
      std::string name = "problem-" + std::to_string(index) +
                         (repr_ == Representation::Graph ? ".graph" : ".pddl");
      std::string content = repr_ == Representation::Graph ? emit_graph_problem(inst.doc)
                                                           : problem_text(inst.doc);
      std::lock_guard<std::mutex> lock(mu_);
      problem = workspace_.write(name, content);
    }

    std::vector<std::string> argv{config_.command};
    argv.insert(argv.end(), config_.args.begin(), config_.args.end());
    argv.push_back(domain.string());
    argv.push_back(problem.string());

    ExecOutput out = run_command(argv, config_.timeout_seconds);
    if (out.spawn_failed) {
      r.error = "cannot run " + config_.command + ": " + out.err;
      return r;
    }
    if (out.timed_out) {
      r.error = "producer timed out after " + std::to_string(config_.timeout_seconds) + "s";
      return r;
    }
    if (out.exit_code != 0) {
      std::string note = out.err.substr(0, 200);
      r.error = "producer exited with " + std::to_string(out.exit_code) +
                (note.empty() ? "" : (": " + note));
      return r;
    }
    r.text = out.out;
    r.ok = true;
    return r;
  }

  ProducerResult run_http(const EvalInstance& inst) {
    ProducerResult r;
    PromptBundle prompt = build_prompt(inst.doc, repr_);

    json body;
    if (!config_.extra_json.empty()) body = json::parse(config_.extra_json);
    if (!config_.model.empty()) body["model"] = config_.model;
    body["prompt"] = prompt.text();

    HttpTarget target = split_url(config_.url);
    httplib::Client client(target.base);
    client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    httplib::Headers headers;
    if (!config_.credential_env.empty()) {
      const char* token = std::getenv(config_.credential_env.c_str());
      if (token && *token) headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    auto res = client.Post(target.path, headers, body.dump(), "application/json");
    if (!res) {
      r.transport_failure = true;
      r.error = "transport error: " + httplib::to_string(res.error());
      return r;
    }
    if (res->status >= 500) {
      r.transport_failure = true;
      r.error = "server error " + std::to_string(res->status);
      return r;
    }
    if (res->status != 200) {
      r.error = "http status " + std::to_string(res->status);
      return r;
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
        !reply["text"].is_string()) {
      r.error = "response is not a JSON object with a text field";
      return r;
    }
    r.text = reply["text"].get<std::string>();
    if (reply.contains("thinking_tokens") && reply["thinking_tokens"].is_number())
      r.thinking_tokens = reply["thinking_tokens"].get<std::uint64_t>();
    r.ok = true;
    return r;
  }

  std::filesystem::path domain_path() {
    std::lock_guard<std::mutex> lock(mu_);
    if (domain_path_.empty()) {
      if (repr_ == Representation::Blocksworld)
        domain_path_ = workspace_.write("domain.pddl", std::string(fixtures::kDomainText) + "\n");
      else
        domain_path_ = workspace_.write("rules.txt", std::string(kGraphRulesPreamble) + "\n");
    }
    return domain_path_;
  }

  const ProducerConfig& config_;
  Representation repr_;
  TempWorkspace workspace_;
  std::filesystem::path domain_path_;
  std::mutex mu_;
};

}  // namespace

namespace {

EvalRecord evaluate_one(const EvalInstance& inst, const ProducerConfig& config,
                        Representation repr, ProducerRunner& runner, std::size_t index) {
  EvalRecord rec;
  rec.instance = inst.doc.name;
  rec.curriculum = inst.curriculum;
  rec.producer = config.id;
  rec.representation = std::string(representation_name(repr));
  rec.c_opt = inst.c_opt;
  rec.complexity_axis = inst.complexity_axis;

  auto t0 = std::chrono::steady_clock::now();
  try {
    ProducerResult pr;
    for (std::uint32_t attempt = 0;; ++attempt) {
      pr = runner.run(inst, index);
      if (pr.ok || !pr.transport_failure || attempt >= config.max_retries) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(250) * (1u << attempt));
    }
    rec.raw_output = pr.text;
    rec.thinking_tokens = pr.thinking_tokens;
    if (!pr.ok) {
      rec.failure = pr.error;
    } else {
      std::vector<Action> actions;
      bool parsed = false;
      std::string parse_error;
      try {
        if (repr == Representation::Blocksworld)
          actions = parse_plan(pr.text, ParseMode::Strict).steps;
        else
          actions = translate_graph_plan(parse_graph_plan(pr.text, ParseMode::Strict)).steps;
        rec.parse_mode = "strict";
        parsed = true;
      } catch (const Error& e) {
        parse_error = e.what();
      }
      if (!parsed) {
        try {
          if (repr == Representation::Blocksworld)
            actions = parse_plan(pr.text, ParseMode::Lenient).steps;
          else
            actions = translate_graph_plan(parse_graph_plan(pr.text, ParseMode::Lenient)).steps;
          rec.parse_mode = "lenient";
          parsed = true;
        } catch (const Error& e) {
          rec.failure = "unparseable output: " + std::string(e.what());
        }
      }
      if (parsed) {
        ExecutionResult exec = execute_plan(inst.doc.initial_state(), actions, inst.doc.goal);
        if (exec.valid) {
          rec.valid = true;
          rec.plan_length = actions.size();
          rec.gap = optimality_gap(actions.size(), inst.c_opt);
        } else {
          rec.failure = exec.reason();
          if (!parse_error.empty()) rec.failure = *rec.failure + " [strict parse: " + parse_error + "]";
        }
      }
    }
  } catch (const std::exception& e) {
    rec.failure = e.what();
  }
  rec.wall_time_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
          .count());
  return rec;
}

}  // namespace

std::vector<EvalRecord> evaluate(const std::vector<EvalInstance>& instances,
                                 const ProducerConfig& producer, const EvaluateOptions& options) {
  producer.validate();
  const std::string repr_name(representation_name(options.representation));

  std::unordered_map<std::string, EvalRecord> existing;
  if (options.resume && !options.records_path.empty() &&
      std::filesystem::exists(options.records_path)) {
    for (EvalRecord& r : load_records(options.records_path))
      if (r.producer == producer.id && r.representation == repr_name)
        existing.emplace(r.instance, std::move(r));
  }

  std::ofstream sink;
  if (!options.records_path.empty()) {
    if (options.records_path.has_parent_path())
      std::filesystem::create_directories(options.records_path.parent_path());
    sink.open(options.records_path, std::ios::app);
    if (!sink) raise(Errc::Io, "cannot open " + options.records_path.string());
  }

  const std::size_t n = instances.size();
  std::vector<std::unique_ptr<EvalRecord>> slots(n);
  std::vector<bool> restored(n, false);
  ProducerRunner runner(producer, options.representation);

  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      std::unique_ptr<EvalRecord> rec;
      auto it = existing.find(instances[i].doc.name);
      if (it != existing.end()) {
        rec = std::make_unique<EvalRecord>(it->second);
        {
          std::lock_guard<std::mutex> lock(mu);
          restored[i] = true;
          slots[i] = std::move(rec);
        }
      } else {
        rec = std::make_unique<EvalRecord>(
            evaluate_one(instances[i], producer, options.representation, runner, i));
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(rec);
      }
      cv.notify_all();
    }
  };

  std::size_t threads = std::min<std::size_t>(std::max(1u, producer.parallelism), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);

  std::vector<EvalRecord> out;
  out.reserve(n);
  {
    // The calling thread doubles as the last worker and the ordered writer.
    std::thread self(worker);
    for (std::size_t i = 0; i < n; ++i) {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return slots[i] != nullptr; });
      EvalRecord rec = *slots[i];
      bool fresh = !restored[i];
      lock.unlock();
      if (fresh && sink.is_open()) {
        sink << record_to_json(rec) << "\n";
        sink.flush();
      }
      if (options.on_record) options.on_record(rec);
      out.push_back(std::move(rec));
    }
    self.join();
  }
  for (auto& t : pool) t.join();
  return out;
}

FitResult fit_tokens_per_step(const std::vector<EvalRecord>& records) {
  std::vector<std::pair<double, double>> pts;
  for (const EvalRecord& r : records)
    if (r.valid && r.thinking_tokens) pts.emplace_back(static_cast<double>(r.c_opt),
                                                       static_cast<double>(*r.thinking_tokens));
  if (pts.size() < 2)
    raise(Errc::InsufficientData, "need at least two valid records with token counts");
  double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0) raise(Errc::InsufficientData, "token fit needs varying optimal costs");

  FitResult f;
  f.n = pts.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy == 0) {
    f.r2 = 1.0;
  } else {
    double ss_res = 0;
    for (auto [x, y] : pts) {
      double e = y - (f.intercept + f.slope * x);
      ss_res += e * e;
    }
    f.r2 = 1.0 - ss_res / syy;
  }
  return f;
}

Summary summarize(const std::vector<EvalRecord>& records) {
  Summary s;
  s.count = records.size();
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const EvalRecord*>>
      groups;
  for (const EvalRecord& r : records) {
    if (r.valid) ++s.valid_count;
    if (r.valid && r.gap && r.gap->num == 0 && !r.gap->is_infinite()) ++s.optimal_count;
    groups[{r.curriculum, r.producer, r.representation}].push_back(&r);
  }
  for (auto& [key, recs] : groups) {
    GroupSummary g;
    std::tie(g.curriculum, g.producer, g.representation) = key;
    g.count = recs.size();
    std::vector<Rational> gaps;
    for (const EvalRecord* r : recs) {
      if (!r->valid) continue;
      ++g.valid_count;
      if (r->gap) {
        gaps.push_back(*r->gap);
        if (r->gap->num == 0 && !r->gap->is_infinite()) ++g.optimal_count;
      }
    }
    if (!gaps.empty()) {
      std::sort(gaps.begin(), gaps.end());
      g.gap_min = gaps.front();
      g.gap_max = gaps.back();
      g.gap_median = gaps[(gaps.size() - 1) / 2];
    }
    s.groups.push_back(std::move(g));
  }
  if (s.valid_count >= 2) {
    try {
      s.fit = fit_tokens_per_step(records);
    } catch (const Error&) {
      // token data absent or degenerate: no fit section
    }
  }
  return s;
}

namespace {

std::string percent(std::size_t part, std::size_t whole) {
  char buf[32];
  double v = whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
  std::snprintf(buf, sizeof buf, "%.1f%%", v);
  return buf;
}

std::string gap_with_decimal(const Rational& g) {
  if (g.is_infinite() || g.num == 0 || g.den == 1) return g.text();
  char buf[32];
  std::snprintf(buf, sizeof buf, " (%.4f)", g.value());
  return g.text() + buf;
}

}  // namespace

std::string render_summary(const Summary& s) {
  std::ostringstream out;
  out << "instances: " << s.count << "  valid: " << s.valid_count << " ("
      << percent(s.valid_count, s.count) << ")  optimal: " << s.optimal_count << " ("
      << percent(s.optimal_count, s.count) << ")\n";
  for (const GroupSummary& g : s.groups) {
    out << g.curriculum << " | " << g.producer << " | " << g.representation << ": n=" << g.count
        << " valid=" << g.valid_count << " optimal=" << g.optimal_count << " optimal_rate="
        << percent(g.optimal_count, g.count);
    if (g.gap_min)
      out << " gap[min=" << gap_with_decimal(*g.gap_min)
          << " median=" << gap_with_decimal(*g.gap_median)
          << " max=" << gap_with_decimal(*g.gap_max) << "]";
    out << "\n";
  }
  if (s.fit) {
    out << "tokens_per_step: slope=" << s.fit->slope << " intercept=" << s.fit->intercept
        << " r2=" << s.fit->r2 << " n=" << s.fit->n << "\n";
  } else {
    out << "tokens_per_step: insufficient data\n";
  }
  return out.str();
}

std::string plot_data_csv(const std::vector<EvalRecord>& records) {
  std::ostringstream out;
  out << "curriculum,producer,representation,instance,complexity_axis,c_opt,plan_length,valid,"
         "gap,thinking_tokens,wall_time_ms\n";
  for (const EvalRecord& r : records) {
    out << r.curriculum << ',' << r.producer << ',' << r.representation << ',' << r.instance
        << ',' << r.complexity_axis << ',' << r.c_opt << ',';
    if (r.plan_length) out << *r.plan_length;
    out << ',' << (r.valid ? 1 : 0) << ',';
    if (r.gap && !r.gap->is_infinite())
      out << r.gap->value();
    else if (r.gap)
      out << "inf";
    out << ',';
    if (r.thinking_tokens) out << *r.thinking_tokens;
    out << ',' << r.wall_time_ms << "\n";
  }
  return out.str();
}

}  // namespace pstar
