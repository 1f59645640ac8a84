#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pstar/pddl.hpp"

namespace pstar {

// Node references in the rewrite domain: R is the root (the table), T is the
// single transfer node (the hand), positive values are block nodes n_k.
using NodeRef = std::int32_t;
inline constexpr NodeRef kRoot = 0;
inline constexpr NodeRef kTransfer = -1;

std::string node_name(NodeRef n);  // "R", "T", "n7"

// A hierarchy over nodes: every block node has exactly one parent edge.
// Equality compares edge sets.
struct GraphState {
  std::map<BlockId, NodeRef> parent;

  bool operator==(const GraphState&) const = default;

  bool has_edge(NodeRef from, BlockId to) const {
    auto it = parent.find(to);
    return it != parent.end() && it->second == from;
  }
  std::size_t out_degree(NodeRef n) const;
  // Children of R in ascending order; used to rebuild towers.
  std::vector<BlockId> root_children() const;
};

struct GraphOp {
  enum class Kind { DetachNode, AttachNode, AttachToRoot, DetachFromRoot };

  Kind kind = Kind::DetachNode;
  BlockId child = 0;
  BlockId other = 0;  // DetachNode: the parent; AttachNode: the target

  static GraphOp detach_node(BlockId child, BlockId parent) {
    return {Kind::DetachNode, child, parent};
  }
  static GraphOp attach_node(BlockId child, BlockId target) {
    return {Kind::AttachNode, child, target};
  }
  static GraphOp attach_to_root(BlockId child) { return {Kind::AttachToRoot, child, 0}; }
  static GraphOp detach_from_root(BlockId child) { return {Kind::DetachFromRoot, child, 0}; }

  bool operator==(const GraphOp&) const = default;

  std::string text() const;  // "DETACH_NODE(n1, n4)"
};

GraphState to_graph(const WorldState& state);
WorldState from_graph(const GraphState& graph);

// Rule-card semantics; throws PreconditionFailed or UnknownBlock.
GraphState apply_graph_op(const GraphState& graph, const GraphOp& op);

// Goal check in graph terms: every goal on-pair is an edge below -> above;
// a retrieve goal needs the edge T -> target.
bool graph_satisfies(const GraphState& graph, const GoalSpec& goal);

// The action/op correspondence is one-to-one in both directions.
GraphOp to_graph_op(const Action& action);
Action from_graph_op(const GraphOp& op);
std::vector<GraphOp> translate_plan(const PlanDoc& plan);
PlanDoc translate_graph_plan(const std::vector<GraphOp>& ops);

std::string emit_graph_ops(const std::vector<GraphOp>& ops);

// Strict: one op per line, upper-case op names, n-prefixed nodes. Lenient
// additionally skips prose and fences and accepts b-prefixed node names.
std::vector<GraphOp> parse_graph_plan(std::string_view text, ParseMode mode);

// Init-section line of the graph problem text. Clear facts render as leaf
// claims, handempty is implicit (dropped), holding renders as a T edge.
struct GraphLine {
  enum class Kind { RootEdge, Edge, Leaf, TransferEdge };

  Kind kind = Kind::RootEdge;
  BlockId child = 0;
  BlockId parent = 0;  // Edge only

  bool operator==(const GraphLine&) const = default;

  std::string text() const;  // "R -> n3", "n16 -> n21", "Leaf: n2", "T -> n5"
};

struct GraphProblem {
  std::vector<GraphLine> init;                       // in init-section order
  std::vector<std::pair<NodeRef, BlockId>> goal;     // (from, to) per goal line

  bool operator==(const GraphProblem&) const = default;
};

GraphProblem graph_problem_from_doc(const ProblemDoc& doc);

// Reconstructs a problem document from graph lines. The graph text carries
// no problem name, so the caller supplies one; handempty is appended last
// when no transfer edge is present.
ProblemDoc doc_from_graph_problem(const GraphProblem& gp, std::string name);

// The fixed rule-card preamble of every graph problem text.
extern const std::string_view kGraphRulesPreamble;

// Rule cards, then "### INITIAL GRAPH STATE ###" with one line per init
// predicate in problem order, then "### GOAL GRAPH PATTERN ###".
std::string emit_graph_problem(const ProblemDoc& doc);

// Accepts emit_graph_problem output as well as full prompt texts; scans for
// the section markers and ignores everything before them.
GraphProblem parse_graph_problem(std::string_view text);

// Exemplar rendering for prompts: bare edges (no leaf claims), root edges
// first ascending by child, then block edges ascending by parent, then the
// transfer edge if any.
std::string render_graph_edges(const GraphState& graph);

}  // namespace pstar
