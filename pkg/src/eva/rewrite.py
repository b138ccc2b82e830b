"""Generic forward/backward traversal and graph rewriting.

A rule is visited once per node in dependency order (forward: operands
first; backward: consumers first). Rules mutate the graph only through the
RewriteContext splice helpers, which keep the consumer index consistent.
Nodes inserted during a pass are not revisited; every shipped rule reaches
quiescence in a single pass, which callers can assert by re-running the
pass with check_quiescence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import EvaError, GraphError
from .ir import Node, NodeKind, OpCode, Program, ValueType


class PassDirection(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class RewriteContext:
    """Mutable view of a program handed to rewrite rules.

    ``children[i]`` lists (consumer id, operand slot) pairs and is kept in
    sync with every splice, so rules and post-pass checks can rely on it.
    """

    def __init__(self, program: Program):
        self.program = program
        self.children: dict[int, list[tuple[int, int]]] = program.children_map()
        self.inserted: list[int] = []

    def _new_id(self) -> int:
        return self.program._fresh_id()

    def add_integer_constant(self, value: int) -> Node:
        node = self.program.add_constant(ValueType.INTEGER, 0.0, [float(value)])
        self.children[node.id] = []
        self.inserted.append(node.id)
        return node

    def add_vector_constant(self, scale: float, elements: Sequence[float]) -> Node:
        node = self.program.add_constant(ValueType.VECTOR, scale, elements)
        self.children[node.id] = []
        self.inserted.append(node.id)
        return node

    def splice_between(
        self,
        parent_id: int,
        edges: Sequence[tuple[int, int]],
        opcode: OpCode,
        extra_param: Optional[int] = None,
    ) -> Node:
        """Insert a new instruction consuming parent_id and redirect the
        given consumer edges to it. ``extra_param`` fills the second operand
        slot (rescale divisor, rotate step, match-scale constant)."""
        params = [parent_id] if extra_param is None else [parent_id, extra_param]
        node = self.program.add_instruction(opcode, params)
        self.children[node.id] = []
        self.inserted.append(node.id)
        self.children[parent_id].append((node.id, 0))
        if extra_param is not None:
            self.children[extra_param].append((node.id, 1))
        for cid, slot in edges:
            consumer = self.program.nodes[cid]
            assert consumer.params[slot] == parent_id
            consumer.params[slot] = node.id
            self.children[parent_id].remove((cid, slot))
            self.children[node.id].append((cid, slot))
        return node

    def splice_after(
        self, parent_id: int, opcode: OpCode, extra_param: Optional[int] = None
    ) -> Node:
        """Insert a new instruction between parent_id and all its current
        consumers (output leaves included, so outputs track the splice)."""
        edges = list(self.children[parent_id])
        return self.splice_between(parent_id, edges, opcode, extra_param)


@dataclass(frozen=True)
class Rule:
    """A rewrite rule: a direction plus a per-node visitor."""

    name: str
    direction: PassDirection
    visit: Callable[[RewriteContext, Node], None]


def _visit_order(program: Program, direction: PassDirection) -> list[int]:
    order = program.toposort()
    return order if direction is PassDirection.FORWARD else order[::-1]


def traverse(
    program: Program,
    direction: PassDirection,
    visit: Callable[[Program, Node, dict], None],
) -> dict:
    """Read-only dependency-ordered traversal accumulating per-node state."""
    states: dict = {}
    for i in _visit_order(program, direction):
        try:
            visit(program, program.nodes[i], states)
        except EvaError as e:
            raise type(e)(f"at node {i}: {e}") from e
    return states


def rewrite(program: Program, rule: Rule, check_quiescence: bool = False) -> Program:
    """Apply the rule at every pre-existing node in dependency order,
    mutating the program in place. Inserted nodes are not revisited."""
    ctx = RewriteContext(program)
    for i in _visit_order(program, rule.direction):
        rule.visit(ctx, program.nodes[i])
    program.check_structure()
    if check_quiescence:
        again = RewriteContext(program)
        before = {i: list(n.params) for i, n in program.nodes.items()}
        for i in _visit_order(program, rule.direction):
            rule.visit(again, program.nodes[i])
        if again.inserted or any(
            list(program.nodes[i].params) != ps for i, ps in before.items()
        ):
            raise GraphError(f"pass {rule.name} is not quiescent after one application")
    return program
