#include "pstar/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace pstar {

const std::string_view kDomainName = "blocksworld-4ops";

namespace {

struct Token {
  enum class Type { Open, Close, Atom, End };
  Type type = Type::End;
  std::string_view text;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ >= src_.size()) return {Token::Type::End, {}, pos_};
    std::size_t start = pos_;
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      return {Token::Type::Open, src_.substr(start, 1), start};
    }
    if (c == ')') {
      ++pos_;
      return {Token::Type::Close, src_.substr(start, 1), start};
    }
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           src_[pos_] != '(' && src_[pos_] != ')')
      ++pos_;
    return {Token::Type::Atom, src_.substr(start, pos_ - start), start};
  }

  std::size_t line_of(std::size_t offset) const {
    return 1 + static_cast<std::size_t>(
                   std::count(src_.begin(), src_.begin() + static_cast<std::ptrdiff_t>(offset),
                              '\n'));
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

class ProblemParser {
 public:
  explicit ProblemParser(std::string_view src) : src_(src), lex_(src) { advance(); }

  ProblemDoc parse() {
    ProblemDoc doc;
    expect_open("problem definition");
    expect_atom("define");
    expect_open("problem name");
    expect_atom("problem");
    doc.name = std::string(take_atom("problem name"));
    expect_close("problem name");

    expect_open("domain reference");
    expect_atom(":domain");
    std::string_view domain = take_atom("domain name");
    if (domain != kDomainName)
      fail(Errc::Syntax, "expected domain " + std::string(kDomainName) + ", got " +
                             std::string(domain));
    expect_close("domain reference");

    parse_objects(doc);
    parse_init(doc);
    parse_goal(doc);
    expect_close("problem definition");
    if (cur_.type != Token::Type::End) fail(Errc::Syntax, "trailing content after problem");

    // The init set must denote a state; translate block-range errors into
    // undeclared-object errors since objects were declared explicitly.
    try {
      (void)state_from_predicates(doc.init, doc.objects.size());
    } catch (const Error& e) {
      if (e.code() == Errc::UnknownBlock) throw Error(Errc::UndeclaredObject, e.detail());
      throw;
    }
    for (const auto& [above, below] : doc.goal.on_pairs()) {
      check_declared(above, doc.objects.size());
      check_declared(below, doc.objects.size());
    }
    if (doc.goal.kind == GoalSpec::Kind::Retrieve)
      check_declared(doc.goal.target, doc.objects.size());

    doc.source_text = std::string(src_);
    return doc;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  [[noreturn]] void fail(Errc code, const std::string& what) {
    raise(code, what + " (line " + std::to_string(lex_.line_of(cur_.offset)) + ")");
  }

  void expect_open(const std::string& where) {
    if (cur_.type != Token::Type::Open) fail(Errc::Syntax, "expected ( in " + where);
    advance();
  }
  void expect_close(const std::string& where) {
    if (cur_.type != Token::Type::Close) fail(Errc::Syntax, "expected ) in " + where);
    advance();
  }
  void expect_atom(std::string_view text) {
    if (cur_.type != Token::Type::Atom || cur_.text != text)
      fail(Errc::Syntax, "expected " + std::string(text));
    advance();
  }
  std::string_view take_atom(const std::string& what) {
    if (cur_.type != Token::Type::Atom) fail(Errc::Syntax, "expected " + what);
    std::string_view t = cur_.text;
    advance();
    return t;
  }

  BlockId parse_block(std::string_view atom) {
    if (atom.size() < 2 || atom[0] != 'b') fail(Errc::Syntax, "bad block name " + std::string(atom));
    BlockId v = 0;
    for (char c : atom.substr(1)) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        fail(Errc::Syntax, "bad block name " + std::string(atom));
      v = v * 10 + static_cast<BlockId>(c - '0');
    }
    if (v == 0) fail(Errc::Syntax, "bad block name " + std::string(atom));
    return v;
  }

  void check_declared(BlockId b, std::size_t n) {
    if (b == 0 || b > n)
      raise(Errc::UndeclaredObject, block_name(b) + " is not a declared object");
  }

  void parse_objects(ProblemDoc& doc) {
    expect_open("objects");
    expect_atom(":objects");
    std::set<BlockId> seen;
    while (cur_.type == Token::Type::Atom) {
      BlockId b = parse_block(cur_.text);
      if (!seen.insert(b).second) fail(Errc::Syntax, "duplicate object " + std::string(cur_.text));
      doc.objects.push_back(b);
      advance();
    }
    expect_close("objects");
    if (doc.objects.empty()) fail(Errc::Syntax, "no objects declared");
    std::size_t n = doc.objects.size();
    if (*seen.rbegin() != n)
      fail(Errc::Syntax, "objects are not exactly b1..b" + std::to_string(n));
  }

  void parse_init(ProblemDoc& doc) {
    expect_open("init");
    expect_atom(":init");
    std::size_t n = doc.objects.size();
    while (cur_.type == Token::Type::Open) {
      advance();
      std::string_view head = take_atom("predicate name");
      std::vector<BlockId> args;
      while (cur_.type == Token::Type::Atom) {
        args.push_back(parse_block(cur_.text));
        advance();
      }
      expect_close("predicate");
      auto arity = [&](std::size_t want) {
        if (args.size() != want)
          raise(Errc::ArityMismatch, "(" + std::string(head) + ") takes " + std::to_string(want) +
                                         " argument(s), got " + std::to_string(args.size()));
      };
      if (head == "on") {
        arity(2);
        doc.init.push_back(Predicate::on(args[0], args[1]));
      } else if (head == "ontable") {
        arity(1);
        doc.init.push_back(Predicate::ontable(args[0]));
      } else if (head == "clear") {
        arity(1);
        doc.init.push_back(Predicate::clear(args[0]));
      } else if (head == "handempty") {
        arity(0);
        doc.init.push_back(Predicate::handempty());
      } else if (head == "holding") {
        arity(1);
        doc.init.push_back(Predicate::holding(args[0]));
      } else {
        raise(Errc::UnknownPredicate, "(" + std::string(head) + ") is not a domain predicate");
      }
      for (BlockId b : args) check_declared(b, n);
    }
    expect_close("init");
  }

  void parse_goal(ProblemDoc& doc) {
    expect_open("goal");
    expect_atom(":goal");

    std::vector<std::pair<BlockId, BlockId>> pairs;  // (above, below)
    BlockId hold_target = 0;

    auto parse_goal_pred = [&]() {
      std::string_view head = take_atom("goal predicate");
      std::vector<BlockId> args;
      while (cur_.type == Token::Type::Atom) {
        args.push_back(parse_block(cur_.text));
        advance();
      }
      expect_close("goal predicate");
      if (head == "on") {
        if (args.size() != 2) raise(Errc::ArityMismatch, "(on) takes 2 arguments");
        pairs.emplace_back(args[0], args[1]);
      } else if (head == "holding") {
        if (args.size() != 1) raise(Errc::ArityMismatch, "(holding) takes 1 argument");
        if (hold_target != 0) raise(Errc::UnsupportedGoalShape, "more than one (holding) goal");
        hold_target = args[0];
      } else {
        raise(Errc::UnsupportedGoalShape,
              "goal predicate (" + std::string(head) + ") is not supported");
      }
    };

    expect_open("goal expression");
    if (cur_.type == Token::Type::Atom && cur_.text == "and") {
      advance();
      while (cur_.type == Token::Type::Open) {
        advance();
        parse_goal_pred();
      }
      expect_close("goal conjunction");
    } else {
      parse_goal_pred();
    }
    expect_close("goal");

    if (hold_target != 0 && !pairs.empty())
      raise(Errc::UnsupportedGoalShape, "goal mixes (holding) with (on)");
    if (hold_target != 0) {
      doc.goal = GoalSpec::retrieve(hold_target);
      return;
    }
    doc.goal = GoalSpec::stacks(chains_from_on_pairs(pairs));
  }

  std::string_view src_;
  Lexer lex_;
  Token cur_;
};

}  // namespace

std::string emit_problem(const ProblemDoc& doc) {
  std::vector<std::pair<BlockId, BlockId>> pairs = doc.goal.on_pairs();
  if (doc.goal.kind == GoalSpec::Kind::Stacks && pairs.empty())
    raise(Errc::DegenerateGoal, "goal has no conjuncts");

  std::string out;
  out += "(define (problem " + doc.name + ")\n";
  out += "(:domain " + std::string(kDomainName) + ")\n";
  out += "  (:objects\n    ";
  for (std::size_t i = 0; i < doc.objects.size(); ++i) {
    if (i) out += ' ';
    out += block_name(doc.objects[i]);
  }
  out += "\n  )\n";
  out += "  (:init\n";
  for (const Predicate& p : doc.init) out += p.text() + "\n";
  out += "  )\n";
  out += "  (:goal\n    (and\n";
  if (doc.goal.kind == GoalSpec::Kind::Retrieve) {
    out += "      " + Predicate::holding(doc.goal.target).text() + "\n";
  } else {
    for (const auto& [above, below] : pairs)
      out += "      " + Predicate::on(above, below).text() + "\n";
  }
  out += "    )\n  )\n)\n";
  return out;
}

ProblemDoc parse_problem(std::string_view text) { return ProblemParser(text).parse(); }

std::string emit_plan(const PlanDoc& plan) {
  std::string out;
  for (const Action& a : plan.steps) out += a.text() + "\n";
  return out;
}

namespace {

bool parse_action_tokens(const std::vector<std::string_view>& tokens, Action& out,
                         bool raise_errors) {
  auto fail = [&](Errc code, const std::string& msg) -> bool {
    if (raise_errors) raise(code, msg);
    return false;
  };
  if (tokens.empty()) return fail(Errc::Syntax, "empty action");
  std::string_view head = tokens[0];
  auto block_arg = [&](std::string_view atom, BlockId& v) -> bool {
    if (atom.size() < 2 || atom[0] != 'b') return false;
    BlockId acc = 0;
    for (char c : atom.substr(1)) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
      acc = acc * 10 + static_cast<BlockId>(c - '0');
    }
    if (acc == 0) return false;
    v = acc;
    return true;
  };

  Action::Kind kind;
  std::size_t want;
  if (head == "pick-up") {
    kind = Action::Kind::PickUp;
    want = 1;
  } else if (head == "put-down") {
    kind = Action::Kind::PutDown;
    want = 1;
  } else if (head == "stack") {
    kind = Action::Kind::Stack;
    want = 2;
  } else if (head == "unstack") {
    kind = Action::Kind::Unstack;
    want = 2;
  } else {
    return fail(Errc::UnknownOp, std::string(head) + " is not a domain action");
  }
  if (tokens.size() - 1 != want)
    return fail(Errc::ArityMismatch, std::string(head) + " takes " + std::to_string(want) +
                                         " argument(s)");
  BlockId b1 = 0, b2 = 0;
  if (!block_arg(tokens[1], b1))
    return fail(Errc::Syntax, "bad block name " + std::string(tokens[1]));
  if (want == 2 && !block_arg(tokens[2], b2))
    return fail(Errc::Syntax, "bad block name " + std::string(tokens[2]));
  out = Action{kind, b1, b2};
  return true;
}

std::vector<std::string_view> split_tokens(std::string_view body) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    std::size_t start = i;
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    if (i > start) tokens.push_back(body.substr(start, i - start));
  }
  return tokens;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

PlanDoc parse_plan(std::string_view text, ParseMode mode) {
  PlanDoc plan;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    std::string_view t = trim(line);
    if (t.empty()) continue;

    if (mode == ParseMode::Strict) {
      if (t.front() != '(' || t.back() != ')')
        raise(Errc::Syntax, "line " + std::to_string(line_no) + " is not an action");
      Action a;
      try {
        parse_action_tokens(split_tokens(t.substr(1, t.size() - 2)), a, true);
      } catch (const Error& e) {
        throw Error(e.code(), e.detail() + " (line " + std::to_string(line_no) + ")");
      }
      plan.steps.push_back(a);
      continue;
    }

    // Lenient: read every parenthesized group on the line that parses as an
    // action; ignore everything else.
    std::size_t i = 0;
    while (i < t.size()) {
      std::size_t open = t.find('(', i);
      if (open == std::string_view::npos) break;
      std::size_t close = t.find(')', open);
      if (close == std::string_view::npos) break;
      Action a;
      if (parse_action_tokens(split_tokens(t.substr(open + 1, close - open - 1)), a, false))
        plan.steps.push_back(a);
      i = close + 1;
    }
  }
  return plan;
}

}  // namespace pstar
