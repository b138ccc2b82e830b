"""Forward dataflow analyses: value types, scales, polynomial counts and
rescale chains.

All analyses are pure functions from a Program to per-node-id maps and never
mutate the graph, so they can run concurrently on a shared program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import GraphError
from .ir import (
    MERGE_OPS,
    MODSWITCH,
    Node,
    NodeKind,
    OpCode,
    Program,
    ValueType,
    merge_chains,
)

_ROTATES = (OpCode.ROTATE_LEFT, OpCode.ROTATE_RIGHT)


def integer_operand(program: Program, node: Node) -> float:
    """Literal held by the Integer constant in the node's second slot
    (rotate step count, or log2 rescale divisor)."""
    ref = program.nodes[node.params[1]]
    if ref.kind is not NodeKind.CONSTANT or len(ref.value) != 1:
        raise GraphError(f"node {node.id}: second operand must be a one-element constant")
    v = ref.value[0]
    if not float(v).is_integer():
        raise GraphError(f"node {node.id}: step/divisor {v} is not an integer")
    return float(v)


def rescale_divisor(program: Program, node: Node) -> float:
    """Log2 of the divisor of a Rescale node."""
    assert node.opcode is OpCode.RESCALE
    return integer_operand(program, node)


def rotation_step(program: Program, node: Node) -> int:
    assert node.opcode in _ROTATES
    return int(integer_operand(program, node))


def compute_types(program: Program) -> dict[int, ValueType]:
    """Result type per node. Any cipher operand makes the result cipher;
    otherwise vector dominates scalar. Integer step/divisor operands do not
    contribute to the result type."""
    types: dict[int, ValueType] = {}
    for i in program.toposort():
        n = program.nodes[i]
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT):
            types[i] = n.type
        elif n.kind is NodeKind.OUTPUT:
            types[i] = types[n.params[0]]
        elif n.opcode in _ROTATES or n.opcode is OpCode.RESCALE:
            types[i] = types[n.params[0]]
        else:
            ts = [types[p] for p in n.params]
            if ValueType.CIPHER in ts:
                types[i] = ValueType.CIPHER
            elif ValueType.VECTOR in ts:
                types[i] = ValueType.VECTOR
            else:
                types[i] = ValueType.SCALAR
    return types


def compute_scales(program: Program) -> dict[int, float]:
    """Log2 scale per node. Multiply adds scales, Rescale subtracts its
    divisor, Add/Sub take the larger operand scale (equality is enforced
    separately by validation), everything else passes through."""
    scales: dict[int, float] = {}
    for i in program.toposort():
        n = program.nodes[i]
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT):
            scales[i] = float(n.scale)
        elif n.kind is NodeKind.OUTPUT:
            scales[i] = scales[n.params[0]]
        elif n.opcode is OpCode.MULTIPLY:
            scales[i] = scales[n.params[0]] + scales[n.params[1]]
        elif n.opcode in (OpCode.ADD, OpCode.SUB):
            scales[i] = max(scales[n.params[0]], scales[n.params[1]])
        elif n.opcode is OpCode.RESCALE:
            scales[i] = scales[n.params[0]] - rescale_divisor(program, n)
        else:
            scales[i] = scales[n.params[0]]
    return scales


def compute_npoly(
    program: Program, types: Optional[dict[int, ValueType]] = None
) -> dict[int, int]:
    """Ciphertext polynomial count per node. Fresh ciphers carry 2
    polynomials and plaintexts 1, Multiply yields k+l-1, Relinearize resets
    to 2. With plaintext count 1 the Multiply formula covers cipher-plain
    products as well."""
    if types is None:
        types = compute_types(program)
    npoly: dict[int, int] = {}
    for i in program.toposort():
        n = program.nodes[i]
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT):
            npoly[i] = 2 if types[i] is ValueType.CIPHER else 1
        elif n.kind is NodeKind.OUTPUT:
            npoly[i] = npoly[n.params[0]]
        elif n.opcode is OpCode.MULTIPLY:
            npoly[i] = npoly[n.params[0]] + npoly[n.params[1]] - 1
        elif n.opcode is OpCode.RELINEARIZE:
            npoly[i] = 2
        elif n.opcode in _ROTATES or n.opcode is OpCode.RESCALE:
            npoly[i] = npoly[n.params[0]]
        else:
            npoly[i] = max(npoly[p] for p in n.params)
    return npoly


@dataclass
class ChainResult:
    """Conforming rescale chains. ``chains[i]`` is None when node i's chain
    is poisoned by a conflict at or above it; ``conflicts`` lists the nodes
    where operand chains disagreed."""

    chains: dict[int, Optional[tuple[float, ...]]] = field(default_factory=dict)
    conflicts: list[tuple[int, Optional[tuple], Optional[tuple]]] = field(default_factory=list)


def compute_chains(
    program: Program, types: Optional[dict[int, ValueType]] = None
) -> ChainResult:
    """Forward rescale-chain propagation.

    Roots start with the empty chain; Rescale appends its divisor, ModSwitch
    appends the wildcard marker. At Add/Sub/Multiply with two cipher
    operands the chains must be equal (wildcards match anything) and are
    merged; a mismatch is recorded as a conflict and poisons the result.
    Non-cipher values carry the empty chain.
    """
    if types is None:
        types = compute_types(program)
    res = ChainResult()
    ch = res.chains
    for i in program.toposort():
        n = program.nodes[i]
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT):
            ch[i] = ()
        elif n.kind is NodeKind.OUTPUT:
            ch[i] = ch[n.params[0]]
        elif n.opcode is OpCode.RESCALE:
            parent = ch[n.params[0]]
            ch[i] = None if parent is None else parent + (rescale_divisor(program, n),)
        elif n.opcode is OpCode.MOD_SWITCH:
            parent = ch[n.params[0]]
            ch[i] = None if parent is None else parent + (MODSWITCH,)
        elif n.opcode in MERGE_OPS and all(
            types[p] is ValueType.CIPHER for p in n.params
        ):
            a, b = ch[n.params[0]], ch[n.params[1]]
            if a is None or b is None:
                ch[i] = None
                continue
            merged = merge_chains(a, b)
            if merged is None:
                res.conflicts.append((i, a, b))
            ch[i] = merged
        else:
            cipher = [p for p in n.params if types[p] is ValueType.CIPHER]
            ch[i] = ch[cipher[0]] if cipher else ()
    return res
