"""In-memory program graphs.

A program is a DAG of typed nodes: constants, inputs, instructions, and one
distinct leaf node per designated output. Instruction operands are ordered
edges to other nodes. Scales are tracked as log2 values throughout; every
scale and rescale divisor is modeled as an exact power of two.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .errors import GraphError

#: Marker for a modulus-switch element inside a rescale chain. Compares
#: equal to any divisor under chain equality.
MODSWITCH = math.inf


class ValueType(enum.Enum):
    CIPHER = "cipher"
    VECTOR = "vector"
    SCALAR = "scalar"
    INTEGER = "integer"


class OpCode(enum.Enum):
    NEGATE = "NEGATE"
    ADD = "ADD"
    SUB = "SUB"
    MULTIPLY = "MULTIPLY"
    COPY = "COPY"
    ROTATE_LEFT = "ROTATE_LEFT"
    ROTATE_RIGHT = "ROTATE_RIGHT"
    RELINEARIZE = "RELINEARIZE"
    MOD_SWITCH = "MOD_SWITCH"
    RESCALE = "RESCALE"


#: Opcodes the compiler inserts; they may not appear in input programs.
COMPILER_ONLY = frozenset({OpCode.RELINEARIZE, OpCode.MOD_SWITCH, OpCode.RESCALE})

#: Required operand count per opcode. Rotate steps and rescale divisors are
#: constant-node operands, so those opcodes are binary here.
ARITY = {
    OpCode.NEGATE: 1,
    OpCode.COPY: 1,
    OpCode.RELINEARIZE: 1,
    OpCode.MOD_SWITCH: 1,
    OpCode.ADD: 2,
    OpCode.SUB: 2,
    OpCode.MULTIPLY: 2,
    OpCode.ROTATE_LEFT: 2,
    OpCode.ROTATE_RIGHT: 2,
    OpCode.RESCALE: 2,
}

#: Binary opcodes whose operands must agree on coefficient modulus (C1).
MERGE_OPS = frozenset({OpCode.ADD, OpCode.SUB, OpCode.MULTIPLY})


class NodeKind(enum.Enum):
    CONSTANT = "constant"
    INPUT = "input"
    INSTRUCTION = "instruction"
    OUTPUT = "output"


@dataclass(slots=True)
class Node:
    """One graph node.

    ``scale`` is meaningful for constants, inputs (declared scale) and output
    leaves (desired output scale); instruction scales are derived by analysis.
    ``value`` holds the literal elements of a constant.
    """

    id: int
    kind: NodeKind
    opcode: Optional[OpCode] = None
    params: list[int] = field(default_factory=list)
    type: Optional[ValueType] = None
    value: Optional[list[float]] = None
    scale: Optional[float] = None


class Program:
    """A vector-arithmetic DAG with a fixed power-of-two vector size.

    Nodes are stored by id in insertion order. Each designated output is
    represented by a distinct OUTPUT leaf node whose single operand is the
    produced instruction; rewrites that splice below that instruction
    automatically redirect the output.
    """

    def __init__(self, vec_size: int):
        if vec_size < 1 or vec_size & (vec_size - 1):
            raise GraphError(f"vec_size {vec_size} is not a power of two")
        self.vec_size = vec_size
        self.nodes: dict[int, Node] = {}
        self.output_ids: list[int] = []
        self._next_id = 0

    # -- construction ---------------------------------------------------

    def _fresh_id(self) -> int:
        i = self._next_id
        while i in self.nodes:
            i += 1
        self._next_id = i + 1
        return i

    def _add(self, node: Node) -> Node:
        if node.id in self.nodes:
            raise GraphError(f"duplicate node id {node.id}")
        self.nodes[node.id] = node
        return node

    def add_input(self, type: ValueType, scale: float, id: Optional[int] = None) -> Node:
        return self._add(
            Node(self._fresh_id() if id is None else id, NodeKind.INPUT, type=type, scale=scale)
        )

    def add_constant(
        self,
        type: ValueType,
        scale: float,
        value: Sequence[float],
        id: Optional[int] = None,
    ) -> Node:
        if type is ValueType.CIPHER:
            raise GraphError("constants cannot be cipher-typed")
        return self._add(
            Node(
                self._fresh_id() if id is None else id,
                NodeKind.CONSTANT,
                type=type,
                scale=scale,
                value=[float(v) for v in value],
            )
        )

    def add_instruction(
        self, opcode: OpCode, params: Sequence[int], id: Optional[int] = None
    ) -> Node:
        if len(params) != ARITY[opcode]:
            raise GraphError(
                f"opcode {opcode.value} expects {ARITY[opcode]} operands, got {len(params)}"
            )
        return self._add(
            Node(
                self._fresh_id() if id is None else id,
                NodeKind.INSTRUCTION,
                opcode=opcode,
                params=list(params),
            )
        )

    def add_output(self, source: int, scale: float, id: Optional[int] = None) -> Node:
        node = self._add(
            Node(
                self._fresh_id() if id is None else id,
                NodeKind.OUTPUT,
                params=[source],
                scale=scale,
            )
        )
        self.output_ids.append(node.id)
        return node

    # -- views ----------------------------------------------------------

    def by_kind(self, kind: NodeKind) -> Iterator[Node]:
        return (n for n in self.nodes.values() if n.kind is kind)

    @property
    def constants(self) -> list[Node]:
        return list(self.by_kind(NodeKind.CONSTANT))

    @property
    def inputs(self) -> list[Node]:
        return list(self.by_kind(NodeKind.INPUT))

    @property
    def instructions(self) -> list[Node]:
        return list(self.by_kind(NodeKind.INSTRUCTION))

    @property
    def outputs(self) -> list[Node]:
        return [self.nodes[i] for i in self.output_ids]

    def output_source(self, leaf_id: int) -> int:
        """Instruction currently feeding the given output leaf."""
        return self.nodes[leaf_id].params[0]

    def children_map(self) -> dict[int, list[tuple[int, int]]]:
        """Map node id -> list of (consumer id, operand slot)."""
        out: dict[int, list[tuple[int, int]]] = {i: [] for i in self.nodes}
        for n in self.nodes.values():
            for slot, p in enumerate(n.params):
                out[p].append((n.id, slot))
        return out

    # -- structure ------------------------------------------------------

    def toposort(self) -> list[int]:
        """Node ids in dependency order (operands before consumers)."""
        indeg = {i: 0 for i in self.nodes}
        for n in self.nodes.values():
            for p in n.params:
                if p not in self.nodes:
                    raise GraphError(f"node {n.id} references missing node {p}")
            indeg[n.id] = len(n.params)
        ready = [i for i, d in indeg.items() if d == 0]
        children = self.children_map()
        order: list[int] = []
        while ready:
            i = ready.pop()
            order.append(i)
            for c, _slot in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self.nodes):
            raise GraphError("cycle detected")
        return order

    def check_structure(self) -> None:
        """Raise GraphError on dangling edges, cycles or arity mismatches."""
        for n in self.nodes.values():
            if n.kind is NodeKind.INSTRUCTION and len(n.params) != ARITY[n.opcode]:
                raise GraphError(
                    f"node {n.id}: opcode {n.opcode.value} has arity "
                    f"{ARITY[n.opcode]}, got {len(n.params)}"
                )
            if n.kind is NodeKind.OUTPUT and len(n.params) != 1:
                raise GraphError(f"output leaf {n.id} must have exactly one operand")
        self.toposort()

    def copy(self) -> "Program":
        q = Program(self.vec_size)
        for n in self.nodes.values():
            q.nodes[n.id] = Node(
                n.id,
                n.kind,
                n.opcode,
                list(n.params),
                n.type,
                None if n.value is None else list(n.value),
                n.scale,
            )
        q.output_ids = list(self.output_ids)
        q._next_id = self._next_id
        return q


# -- rescale chains -----------------------------------------------------


def chains_equal(a: Sequence[float], b: Sequence[float]) -> bool:
    """Chain equality: same length, elementwise equal or either side is the
    modswitch marker."""
    if len(a) != len(b):
        return False
    return all(x == y or x == MODSWITCH or y == MODSWITCH for x, y in zip(a, b))


def merge_chains(a: Sequence[float], b: Sequence[float]) -> Optional[tuple[float, ...]]:
    """Merge two equal chains, resolving modswitch markers against concrete
    divisors from the other side. Returns None if the chains are unequal."""
    if not chains_equal(a, b):
        return None
    return tuple(x if x != MODSWITCH else y for x, y in zip(a, b))


def resolve_chain(chain: Sequence[float], sf: float) -> list[float]:
    """Replace any remaining modswitch markers with the divisor cap."""
    return [sf if x == MODSWITCH else x for x in chain]


# -- whole-program operations -------------------------------------------


def multiplicative_depth(program: Program) -> dict[int, int]:
    """Per node, the largest number of cipher-operand Multiply nodes on any
    path from a root to that node (inclusive)."""
    from .analysis import compute_types  # local import to avoid a cycle

    types = compute_types(program)
    depth: dict[int, int] = {}
    for i in program.toposort():
        n = program.nodes[i]
        d = max((depth[p] for p in n.params), default=0)
        if n.opcode is OpCode.MULTIPLY and any(
            types[p] is ValueType.CIPHER for p in n.params
        ):
            d += 1
        depth[i] = d
    return depth


def replicate_vector(values: Sequence[float], vec_size: int) -> list[float]:
    """Tile a power-of-two-length vector up to the program vector size."""
    k = len(values)
    if k < 1 or k & (k - 1):
        raise GraphError(f"vector length {k} is not a power of two")
    if k > vec_size:
        raise GraphError(f"vector length {k} exceeds vec_size {vec_size}")
    return list(values) * (vec_size // k)


def replicate_inputs(program: Program) -> Program:
    """Return a copy in which every vector constant shorter than vec_size is
    tiled with contiguous copies. Runtime input values are tiled the same way
    by the executor when they are bound.

    Rotations by steps below the original length agree with the original
    vector on its first elements, so program semantics are preserved.
    """
    q = program.copy()
    for n in q.nodes.values():
        if n.kind is NodeKind.CONSTANT and n.type is ValueType.VECTOR:
            if len(n.value) != q.vec_size:
                n.value = replicate_vector(n.value, q.vec_size)
    return q
