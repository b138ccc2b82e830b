"""Shared builders: worked example programs and graph mutation helpers.

The three example builders return the program plus named handles to its
nodes so structural tests can point at exact insertion sites.
"""

from __future__ import annotations

from types import SimpleNamespace

from eva.ir import NodeKind, OpCode, Program, ValueType


def power_product() -> SimpleNamespace:
    """x squared times y cubed; x at 2^60, y at 2^30, one output at 2^30."""
    p = Program(8)
    x = p.add_input(ValueType.CIPHER, 60.0)
    y = p.add_input(ValueType.CIPHER, 30.0)
    xx = p.add_instruction(OpCode.MULTIPLY, [x.id, x.id])
    yy = p.add_instruction(OpCode.MULTIPLY, [y.id, y.id])
    yyy = p.add_instruction(OpCode.MULTIPLY, [yy.id, y.id])
    top = p.add_instruction(OpCode.MULTIPLY, [xx.id, yyy.id])
    out = p.add_output(top.id, 30.0)
    return SimpleNamespace(
        program=p, x=x, y=y, xx=xx, yy=yy, yyy=yyy, top=top, out=out
    )


def square_plus_input() -> SimpleNamespace:
    """x squared plus x; x at 2^30, one output at 2^30. The addition mixes
    scales 2^60 and 2^30, exercising scale matching."""
    p = Program(8)
    x = p.add_input(ValueType.CIPHER, 30.0)
    xx = p.add_instruction(OpCode.MULTIPLY, [x.id, x.id])
    total = p.add_instruction(OpCode.ADD, [xx.id, x.id])
    out = p.add_output(total.id, 30.0)
    return SimpleNamespace(program=p, x=x, xx=xx, total=total, out=out)


def square_plus_double() -> SimpleNamespace:
    """x squared plus (x plus x); x at 2^60, one output at 2^30. The only
    association where eager and lazy modulus switching place differently."""
    p = Program(8)
    x = p.add_input(ValueType.CIPHER, 60.0)
    xx = p.add_instruction(OpCode.MULTIPLY, [x.id, x.id])
    dbl = p.add_instruction(OpCode.ADD, [x.id, x.id])
    total = p.add_instruction(OpCode.ADD, [xx.id, dbl.id])
    out = p.add_output(total.id, 30.0)
    return SimpleNamespace(program=p, x=x, xx=xx, dbl=dbl, total=total, out=out)


def opcode_nodes(program: Program, opcode: OpCode) -> list:
    """Instruction nodes with the given opcode, in id order."""
    return sorted(
        (n for n in program.instructions if n.opcode is opcode),
        key=lambda n: n.id,
    )


def inserted_instructions(source: Program, compiled: Program) -> list:
    """Instructions present in the compiled program but not the source."""
    return sorted(
        (
            n
            for n in compiled.instructions
            if n.id not in source.nodes
        ),
        key=lambda n: n.id,
    )


def delete_instruction(program: Program, node_id: int) -> Program:
    """Remove one instruction, rewiring its consumers to its first operand."""
    q = program.copy()
    target = q.nodes.pop(node_id)
    assert target.kind is NodeKind.INSTRUCTION
    src = target.params[0]
    for n in q.nodes.values():
        n.params = [src if p == node_id else p for p in n.params]
    return q


def root_distance(program: Program) -> dict[int, int]:
    """Longest path length from any leaf down to each node."""
    dist: dict[int, int] = {}
    for i in program.toposort():
        n = program.nodes[i]
        dist[i] = max((dist[p] + 1 for p in n.params), default=0)
    return dist
