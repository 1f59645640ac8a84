#include "pstar/fixtures.hpp"

#include "pstar/graph.hpp"

namespace pstar {

const std::string_view kGraphRulesPreamble = R"fx(SYSTEM PROMPT: GRAPH REWRITE SOLVER

I. THE DOMAIN
You are a Graph Rewriting Engine. You operate on a directed graph
representing a hierarchical data structure.

Definitions:
Nodes ($V$):
R: The Root Node (Fixed anchor, infinite outgoing capacity).
T: The Transfer Node (Temporary buffer, capacity = 1 outgoing edge).

Edges ($E$):
Directed edge u -> v represents a parent-child link.
Leaf Node: A node x is a leaf if it has out-degree 0 (it has no children).

II. THE RULES (OPERATIONS)
You can only perform the following four atomic operations to modify the graph topology.

1. DETACH_NODE(child, parent)
Semantics: Detaches a leaf node from its current parent.
(Constraint: Do NOT use this to detach from the Root R).
Preconditions:
- Edge parent -> child exists.
- child is a Leaf (Out-degree = 0).
- T (Transfer Node) is empty (Out-degree = 0).
- parent is not R.
Effect: Delete edge parent -> child. Add edge T -> child.

2. ATTACH_NODE(child, target)
Semantics: Attaches the node currently in the Transfer Node to a new target leaf.
(Constraint: Do NOT use this to attach to the Root R).
Preconditions:
- Edge T -> child exists.
- target is a Leaf node (Out-degree = 0).
- child != target.
- target is not R.
Effect: Delete edge T -> child. Add edge target -> child.

3. ATTACH_TO_ROOT(child)
Semantics: Attaches the node currently in the Transfer Node to the Root R.
Preconditions:
- Edge T -> child exists.
Effect: Delete edge T -> child. Add edge R -> child.

4. DETACH_FROM_ROOT(child)
Semantics: Detaches a leaf node that is currently connected directly to the Root R.
Preconditions:
- Edge R -> child exists.
- child is a Leaf (Out-degree = 0).
- T (Transfer Node) is empty (Out-degree = 0).
Effect: Delete edge R -> child. Add edge T -> child.)fx";

namespace fixtures {

const std::string_view kDomainText = R"fx((define (domain blocksworld-4ops)
  (:requirements :strips)
(:predicates (clear ?x)
             (ontable ?x)
             (handempty)
             (holding ?x)
             (on ?x ?y))

(:action pick-up
  :parameters (?ob)
  :precondition (and (clear ?ob) (ontable ?ob) (handempty))
  :effect (and (holding ?ob) (not (clear ?ob)) (not (ontable ?ob))
               (not (handempty))))

(:action put-down
  :parameters  (?ob)
  :precondition (holding ?ob)
  :effect (and (clear ?ob) (handempty) (ontable ?ob)
               (not (holding ?ob))))

(:action stack
  :parameters  (?ob ?underob)
  :precondition (and (clear ?underob) (holding ?ob))
  :effect (and (handempty) (clear ?ob) (on ?ob ?underob)
               (not (clear ?underob)) (not (holding ?ob))))

(:action unstack
  :parameters  (?ob ?underob)
  :precondition (and (on ?ob ?underob) (clear ?ob) (handempty))
  :effect (and (holding ?ob) (clear ?underob)
               (not (on ?ob ?underob)) (not (clear ?ob)) (not (handempty))))))fx";

const std::string_view kInstructionAfterDomain = R"fx(Provide only the correct pddl plan. Do not add numbers, items or any additional text. Follow the syntax of the above examplars for the plan if provided. Your plan as plain text:)fx";

const std::string_view kInstructionExemplar = R"fx(Provide only the result. Do not add numbers, items or any additional text. Follow the format of the above examplars without additional formatting:)fx";

const std::string_view kInstructionFinal = R"fx(Provide only the result. Do not add numbers, items or any additional text. Follow the format of the above exemplars without additional formatting:)fx";

const std::string_view kExemplarProblemText = R"fx((define (problem BW-rand-4)
(:domain blocksworld-4ops)
(:objects b2 b4 b1 b3)
(:init
(clear b1)
(ontable b2)
(ontable b3)
(clear b3)
(on b1 b4)
(on b4 b2)
(handempty)
)
(:goal (and
(on b2 b1)
(on b4 b3)
))
))fx";

const std::string_view kExemplarPlanText = R"fx((unstack b1 b4)
(put-down b1)
(unstack b4 b2)
(stack b4 b3)
(pick-up b2)
(stack b2 b1))fx";

}  // namespace fixtures
}  // namespace pstar
