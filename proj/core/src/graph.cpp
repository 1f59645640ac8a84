#include "pstar/graph.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace pstar {

std::string node_name(NodeRef n) {
  if (n == kRoot) return "R";
  if (n == kTransfer) return "T";
  return "n" + std::to_string(n);
}

std::size_t GraphState::out_degree(NodeRef n) const {
  std::size_t d = 0;
  for (const auto& [child, p] : parent)
    if (p == n) ++d;
  return d;
}

std::vector<BlockId> GraphState::root_children() const {
  std::vector<BlockId> out;
  for (const auto& [child, p] : parent)
    if (p == kRoot) out.push_back(child);
  return out;  // map order is ascending already
}

std::string GraphOp::text() const {
  switch (kind) {
    case Kind::DetachNode:
      return "DETACH_NODE(" + node_name(static_cast<NodeRef>(child)) + ", " +
             node_name(static_cast<NodeRef>(other)) + ")";
    case Kind::AttachNode:
      return "ATTACH_NODE(" + node_name(static_cast<NodeRef>(child)) + ", " +
             node_name(static_cast<NodeRef>(other)) + ")";
    case Kind::AttachToRoot:
      return "ATTACH_TO_ROOT(" + node_name(static_cast<NodeRef>(child)) + ")";
    case Kind::DetachFromRoot:
      return "DETACH_FROM_ROOT(" + node_name(static_cast<NodeRef>(child)) + ")";
  }
  return "";
}

GraphState to_graph(const WorldState& state) {
  GraphState g;
  for (const auto& t : state.towers) {
    g.parent[t[0]] = kRoot;
    for (std::size_t i = 1; i < t.size(); ++i)
      g.parent[t[i]] = static_cast<NodeRef>(t[i - 1]);
  }
  if (state.held) g.parent[*state.held] = kTransfer;
  return g;
}

WorldState from_graph(const GraphState& graph) {
  std::map<BlockId, BlockId> child_of;  // parent block -> its unique child
  BlockId held = 0;
  for (const auto& [child, p] : graph.parent) {
    if (p == kTransfer) {
      if (held != 0) raise(Errc::Conflict, "two nodes attached to T");
      held = child;
    } else if (p != kRoot) {
      if (!child_of.emplace(static_cast<BlockId>(p), child).second)
        raise(Errc::Conflict, "node " + node_name(p) + " has two children");
    }
  }
  WorldState state;
  std::size_t placed = 0;
  for (BlockId bottom : graph.root_children()) {
    std::vector<BlockId> tower{bottom};
    ++placed;
    BlockId cur = bottom;
    for (auto it = child_of.find(cur); it != child_of.end(); it = child_of.find(cur)) {
      cur = it->second;
      tower.push_back(cur);
      ++placed;
      if (tower.size() > graph.parent.size())
        raise(Errc::Cycle, "edge chain does not terminate");
    }
    state.towers.push_back(std::move(tower));
  }
  if (held != 0) {
    state.held = held;
    ++placed;
  }
  if (placed != graph.parent.size())
    raise(Errc::Cycle, "graph contains nodes not grounded at R");
  return state;
}

namespace {

void require_node(const GraphState& g, BlockId b) {
  if (g.parent.find(b) == g.parent.end())
    raise(Errc::UnknownBlock, node_name(static_cast<NodeRef>(b)) + " is not in the graph");
}

[[noreturn]] void op_fail(const GraphOp& op, const std::string& what) {
  raise(Errc::PreconditionFailed, op.text() + ": " + what);
}

}  // namespace

GraphState apply_graph_op(const GraphState& graph, const GraphOp& op) {
  require_node(graph, op.child);
  GraphState next = graph;
  switch (op.kind) {
    case GraphOp::Kind::DetachNode:
      require_node(graph, op.other);
      if (!graph.has_edge(static_cast<NodeRef>(op.other), op.child))
        op_fail(op, "edge " + node_name(static_cast<NodeRef>(op.other)) + " -> " +
                        node_name(static_cast<NodeRef>(op.child)) + " does not exist");
      if (graph.out_degree(static_cast<NodeRef>(op.child)) != 0)
        op_fail(op, node_name(static_cast<NodeRef>(op.child)) + " is not a leaf");
      if (graph.out_degree(kTransfer) != 0) op_fail(op, "T is not empty");
      next.parent[op.child] = kTransfer;
      break;
    case GraphOp::Kind::AttachNode:
      require_node(graph, op.other);
      if (!graph.has_edge(kTransfer, op.child))
        op_fail(op, "edge T -> " + node_name(static_cast<NodeRef>(op.child)) + " does not exist");
      if (graph.out_degree(static_cast<NodeRef>(op.other)) != 0)
        op_fail(op, node_name(static_cast<NodeRef>(op.other)) + " is not a leaf");
      next.parent[op.child] = static_cast<NodeRef>(op.other);
      break;
    case GraphOp::Kind::AttachToRoot:
      if (!graph.has_edge(kTransfer, op.child))
        op_fail(op, "edge T -> " + node_name(static_cast<NodeRef>(op.child)) + " does not exist");
      next.parent[op.child] = kRoot;
      break;
    case GraphOp::Kind::DetachFromRoot:
      if (!graph.has_edge(kRoot, op.child))
        op_fail(op, "edge R -> " + node_name(static_cast<NodeRef>(op.child)) + " does not exist");
      if (graph.out_degree(static_cast<NodeRef>(op.child)) != 0)
        op_fail(op, node_name(static_cast<NodeRef>(op.child)) + " is not a leaf");
      if (graph.out_degree(kTransfer) != 0) op_fail(op, "T is not empty");
      next.parent[op.child] = kTransfer;
      break;
  }
  return next;
}

bool graph_satisfies(const GraphState& graph, const GoalSpec& goal) {
  if (goal.kind == GoalSpec::Kind::Retrieve) return graph.has_edge(kTransfer, goal.target);
  for (const auto& [above, below] : goal.on_pairs())
    if (!graph.has_edge(static_cast<NodeRef>(below), above)) return false;
  return true;
}

GraphOp to_graph_op(const Action& action) {
  switch (action.kind) {
    case Action::Kind::Unstack: return GraphOp::detach_node(action.block, action.under);
    case Action::Kind::PutDown: return GraphOp::attach_to_root(action.block);
    case Action::Kind::PickUp: return GraphOp::detach_from_root(action.block);
    case Action::Kind::Stack: return GraphOp::attach_node(action.block, action.under);
  }
  raise(Errc::UnknownOp, "bad action kind");
}

Action from_graph_op(const GraphOp& op) {
  switch (op.kind) {
    case GraphOp::Kind::DetachNode: return Action::unstack(op.child, op.other);
    case GraphOp::Kind::AttachToRoot: return Action::put_down(op.child);
    case GraphOp::Kind::DetachFromRoot: return Action::pick_up(op.child);
    case GraphOp::Kind::AttachNode: return Action::stack(op.child, op.other);
  }
  raise(Errc::UnknownOp, "bad op kind");
}

std::vector<GraphOp> translate_plan(const PlanDoc& plan) {
  std::vector<GraphOp> ops;
  ops.reserve(plan.steps.size());
  for (const Action& a : plan.steps) ops.push_back(to_graph_op(a));
  return ops;
}

PlanDoc translate_graph_plan(const std::vector<GraphOp>& ops) {
  PlanDoc plan;
  plan.steps.reserve(ops.size());
  for (const GraphOp& op : ops) plan.steps.push_back(from_graph_op(op));
  return plan;
}

std::string emit_graph_ops(const std::vector<GraphOp>& ops) {
  std::string out;
  for (const GraphOp& op : ops) out += op.text() + "\n";
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "n12" strictly; lenient also accepts "b12".
bool parse_node_arg(std::string_view atom, ParseMode mode, BlockId& out) {
  atom = trim(atom);
  if (atom.size() < 2) return false;
  char prefix = atom[0];
  if (prefix != 'n' && !(mode == ParseMode::Lenient && prefix == 'b')) return false;
  BlockId v = 0;
  for (char c : atom.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + static_cast<BlockId>(c - '0');
  }
  if (v == 0) return false;
  out = v;
  return true;
}

bool parse_op_text(std::string_view body, ParseMode mode, bool raise_errors, GraphOp& out) {
  auto fail = [&](Errc code, const std::string& msg) -> bool {
    if (raise_errors) raise(code, msg);
    return false;
  };
  std::size_t open = body.find('(');
  std::size_t close = body.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    return fail(Errc::Syntax, "malformed op: " + std::string(body));
  std::string_view head = trim(body.substr(0, open));
  std::string_view args = body.substr(open + 1, close - open - 1);

  GraphOp::Kind kind;
  std::size_t want;
  if (head == "DETACH_NODE") {
    kind = GraphOp::Kind::DetachNode;
    want = 2;
  } else if (head == "ATTACH_NODE") {
    kind = GraphOp::Kind::AttachNode;
    want = 2;
  } else if (head == "ATTACH_TO_ROOT") {
    kind = GraphOp::Kind::AttachToRoot;
    want = 1;
  } else if (head == "DETACH_FROM_ROOT") {
    kind = GraphOp::Kind::DetachFromRoot;
    want = 1;
  } else {
    return fail(Errc::UnknownOp, std::string(head) + " is not a rewrite op");
  }

  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= args.size()) {
    std::size_t comma = args.find(',', start);
    if (comma == std::string_view::npos) {
      if (!trim(args.substr(start)).empty()) parts.push_back(args.substr(start));
      break;
    }
    parts.push_back(args.substr(start, comma - start));
    start = comma + 1;
  }
  if (parts.size() != want)
    return fail(Errc::ArityMismatch,
                std::string(head) + " takes " + std::to_string(want) + " argument(s)");
  BlockId child = 0, other = 0;
  if (!parse_node_arg(parts[0], mode, child))
    return fail(Errc::Syntax, "bad node name " + std::string(trim(parts[0])));
  if (want == 2 && !parse_node_arg(parts[1], mode, other))
    return fail(Errc::Syntax, "bad node name " + std::string(trim(parts[1])));
  out = GraphOp{kind, child, other};
  return true;
}

}  // namespace

std::vector<GraphOp> parse_graph_plan(std::string_view text, ParseMode mode) {
  std::vector<GraphOp> ops;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    std::string_view t = trim(line);
    if (t.empty()) continue;
    if (mode == ParseMode::Strict) {
      GraphOp op;
      try {
        parse_op_text(t, mode, true, op);
      } catch (const Error& e) {
        throw Error(e.code(), e.detail() + " (line " + std::to_string(line_no) + ")");
      }
      ops.push_back(op);
    } else {
      GraphOp op;
      if (parse_op_text(t, mode, false, op)) ops.push_back(op);
    }
  }
  return ops;
}

std::string GraphLine::text() const {
  switch (kind) {
    case Kind::RootEdge: return "R -> " + node_name(static_cast<NodeRef>(child));
    case Kind::Edge:
      return node_name(static_cast<NodeRef>(parent)) + " -> " +
             node_name(static_cast<NodeRef>(child));
    case Kind::Leaf: return "Leaf: " + node_name(static_cast<NodeRef>(child));
    case Kind::TransferEdge: return "T -> " + node_name(static_cast<NodeRef>(child));
  }
  return "";
}

GraphProblem graph_problem_from_doc(const ProblemDoc& doc) {
  GraphProblem gp;
  for (const Predicate& p : doc.init) {
    switch (p.kind) {
      case Predicate::Kind::On:
        gp.init.push_back({GraphLine::Kind::Edge, p.a, p.b});
        break;
      case Predicate::Kind::OnTable:
        gp.init.push_back({GraphLine::Kind::RootEdge, p.a, 0});
        break;
      case Predicate::Kind::Clear:
        gp.init.push_back({GraphLine::Kind::Leaf, p.a, 0});
        break;
      case Predicate::Kind::Holding:
        gp.init.push_back({GraphLine::Kind::TransferEdge, p.a, 0});
        break;
      case Predicate::Kind::HandEmpty:
        break;  // implicit in the graph rendering
    }
  }
  if (doc.goal.kind == GoalSpec::Kind::Retrieve) {
    gp.goal.emplace_back(kTransfer, doc.goal.target);
  } else {
    for (const auto& [above, below] : doc.goal.on_pairs())
      gp.goal.emplace_back(static_cast<NodeRef>(below), above);
  }
  return gp;
}

ProblemDoc doc_from_graph_problem(const GraphProblem& gp, std::string name) {
  ProblemDoc doc;
  doc.name = std::move(name);
  BlockId max_block = 0;
  bool has_transfer = false;
  for (const GraphLine& line : gp.init) {
    max_block = std::max({max_block, line.child, line.parent});
    switch (line.kind) {
      case GraphLine::Kind::RootEdge:
        doc.init.push_back(Predicate::ontable(line.child));
        break;
      case GraphLine::Kind::Edge:
        doc.init.push_back(Predicate::on(line.child, line.parent));
        break;
      case GraphLine::Kind::Leaf:
        doc.init.push_back(Predicate::clear(line.child));
        break;
      case GraphLine::Kind::TransferEdge:
        doc.init.push_back(Predicate::holding(line.child));
        has_transfer = true;
        break;
    }
  }
  if (!has_transfer) doc.init.push_back(Predicate::handempty());

  std::vector<std::pair<BlockId, BlockId>> pairs;  // (above, below)
  BlockId retrieve_target = 0;
  for (const auto& [from, to] : gp.goal) {
    max_block = std::max(max_block, to);
    if (from == kTransfer) {
      if (retrieve_target != 0 || !pairs.empty())
        raise(Errc::UnsupportedGoalShape, "goal mixes transfer with edges");
      retrieve_target = to;
    } else if (from == kRoot) {
      raise(Errc::UnsupportedGoalShape, "root edges are not goal patterns");
    } else {
      if (retrieve_target != 0)
        raise(Errc::UnsupportedGoalShape, "goal mixes transfer with edges");
      max_block = std::max(max_block, static_cast<BlockId>(from));
      pairs.emplace_back(to, static_cast<BlockId>(from));
    }
  }
  doc.goal = retrieve_target != 0 ? GoalSpec::retrieve(retrieve_target)
                                  : GoalSpec::stacks(chains_from_on_pairs(pairs));

  doc.objects.resize(max_block);
  std::iota(doc.objects.begin(), doc.objects.end(), 1);

  // The reconstructed init must denote a state over a dense universe.
  (void)state_from_predicates(doc.init, doc.objects.size());
  doc.source_text = emit_problem(doc);
  return doc;
}

std::string emit_graph_problem(const ProblemDoc& doc) {
  GraphProblem gp = graph_problem_from_doc(doc);
  std::string out(kGraphRulesPreamble);
  out += "\n\n### INITIAL GRAPH STATE ###\n";
  for (const GraphLine& line : gp.init) out += line.text() + "\n";
  out += "\n### GOAL GRAPH PATTERN ###\n";
  for (const auto& [from, to] : gp.goal)
    out += node_name(from) + " -> " + node_name(static_cast<NodeRef>(to)) + "\n";
  return out;
}

namespace {

bool parse_graph_line(std::string_view t, GraphLine& out) {
  if (t.rfind("Leaf:", 0) == 0) {
    BlockId b = 0;
    if (!parse_node_arg(trim(t.substr(5)), ParseMode::Strict, b)) return false;
    out = {GraphLine::Kind::Leaf, b, 0};
    return true;
  }
  std::size_t arrow = t.find("->");
  if (arrow == std::string_view::npos) return false;
  std::string_view lhs = trim(t.substr(0, arrow));
  std::string_view rhs = trim(t.substr(arrow + 2));
  BlockId child = 0;
  if (!parse_node_arg(rhs, ParseMode::Strict, child)) return false;
  if (lhs == "R") {
    out = {GraphLine::Kind::RootEdge, child, 0};
    return true;
  }
  if (lhs == "T") {
    out = {GraphLine::Kind::TransferEdge, child, 0};
    return true;
  }
  BlockId parent = 0;
  if (!parse_node_arg(lhs, ParseMode::Strict, parent)) return false;
  out = {GraphLine::Kind::Edge, child, parent};
  return true;
}

}  // namespace

GraphProblem parse_graph_problem(std::string_view text) {
  constexpr std::string_view kInitMarker = "### INITIAL GRAPH STATE ###";
  constexpr std::string_view kGoalMarker = "### GOAL GRAPH PATTERN ###";
  std::size_t init_at = text.find(kInitMarker);
  if (init_at == std::string_view::npos)
    raise(Errc::Syntax, "missing " + std::string(kInitMarker));
  std::size_t goal_at = text.find(kGoalMarker, init_at);
  if (goal_at == std::string_view::npos)
    raise(Errc::Syntax, "missing " + std::string(kGoalMarker));

  GraphProblem gp;
  auto each_line = [](std::string_view region, auto&& fn) {
    std::size_t pos = 0;
    while (pos <= region.size()) {
      std::size_t eol = region.find('\n', pos);
      std::string_view line =
          region.substr(pos, eol == std::string_view::npos ? region.size() - pos : eol - pos);
      pos = eol == std::string_view::npos ? region.size() + 1 : eol + 1;
      std::string_view t = trim(line);
      if (!t.empty()) fn(t);
    }
  };

  each_line(text.substr(init_at + kInitMarker.size(), goal_at - init_at - kInitMarker.size()),
            [&](std::string_view t) {
              GraphLine line;
              if (!parse_graph_line(t, line))
                raise(Errc::Syntax, "bad graph line: " + std::string(t));
              gp.init.push_back(line);
            });
  each_line(text.substr(goal_at + kGoalMarker.size()), [&](std::string_view t) {
    GraphLine line;
    if (!parse_graph_line(t, line) || line.kind == GraphLine::Kind::Leaf)
      raise(Errc::Syntax, "bad goal pattern line: " + std::string(t));
    NodeRef from = line.kind == GraphLine::Kind::RootEdge ? kRoot
                   : line.kind == GraphLine::Kind::TransferEdge
                       ? kTransfer
                       : static_cast<NodeRef>(line.parent);
    gp.goal.emplace_back(from, line.child);
  });
  return gp;
}

std::string render_graph_edges(const GraphState& graph) {
  std::vector<BlockId> roots = graph.root_children();
  std::vector<std::pair<BlockId, BlockId>> edges;  // (parent, child)
  BlockId transfer = 0;
  for (const auto& [child, p] : graph.parent) {
    if (p > 0) edges.emplace_back(static_cast<BlockId>(p), child);
    if (p == kTransfer) transfer = child;
  }
  std::sort(edges.begin(), edges.end());
  std::string out;
  for (BlockId b : roots) out += "R -> " + node_name(static_cast<NodeRef>(b)) + "\n";
  for (const auto& [p, c] : edges)
    out += node_name(static_cast<NodeRef>(p)) + " -> " + node_name(static_cast<NodeRef>(c)) + "\n";
  if (transfer != 0) out += "T -> " + node_name(static_cast<NodeRef>(transfer)) + "\n";
  return out;
}

}  // namespace pstar
