"""Constraint checking for compiled programs.

Four constraint families, each reported as C<k>:
  C1  operand coefficient moduli (rescale chains) conform and agree at
      every cipher-cipher Add/Sub/Multiply;
  C2  operand scales agree at every Add/Sub involving a cipher, and no
      output is left at a scale that a final rescale should have consumed;
  C3  every cipher operand of a Multiply carries exactly 2 polynomials,
      cipher operands of Add/Sub agree, and cipher outputs are reduced
      back to 2;
  C4  every rescale divisor is positive and at most the divisor cap.

All checks are pure and collect violations exhaustively rather than
stopping at the first problem.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import analysis
from .ir import (
    MERGE_OPS,
    MODSWITCH,
    NodeKind,
    OpCode,
    Program,
    ValueType,
)


@dataclass(frozen=True)
class Violation:
    constraint: int
    node: int
    detail: str

    def __str__(self) -> str:
        return f"C{self.constraint} node={self.node} {self.detail}"


def _fmt_chain(chain) -> str:
    if chain is None:
        return "<non-conforming>"
    return "[" + ", ".join("*" if x == MODSWITCH else f"{x:g}" for x in chain) + "]"


def check_chains(program: Program) -> list[Violation]:
    """C1: rescale chains conform, and both cipher operands of every
    Add/Sub/Multiply sit at the same coefficient modulus."""
    types = analysis.compute_types(program)
    res = analysis.compute_chains(program, types)
    return [
        Violation(
            1,
            nid,
            f"operand chains differ: {_fmt_chain(a)} vs {_fmt_chain(b)}",
        )
        for nid, a, b in res.conflicts
    ]


def check_scales(program: Program, sf: float = 60.0) -> list[Violation]:
    """C2 and C4: scale agreement at additions, divisor cap at rescales,
    and output scales small enough that no trailing rescale is missing."""
    types = analysis.compute_types(program)
    scales = analysis.compute_scales(program)
    out: list[Violation] = []
    for n in program.nodes.values():
        if (
            n.kind is NodeKind.INSTRUCTION
            and n.opcode in (OpCode.ADD, OpCode.SUB)
            and any(types[p] is ValueType.CIPHER for p in n.params)
        ):
            sa, sb = scales[n.params[0]], scales[n.params[1]]
            if sa != sb:
                out.append(
                    Violation(2, n.id, f"operand scales differ: 2^{sa:g} vs 2^{sb:g}")
                )
        if n.kind is NodeKind.INSTRUCTION and n.opcode is OpCode.RESCALE:
            d = analysis.rescale_divisor(program, n)
            if not 0 < d <= sf:
                out.append(
                    Violation(4, n.id, f"rescale divisor 2^{d:g} outside (1, 2^{sf:g}]")
                )
    # A scale at or above waterline + cap means a rescale that should have
    # fired before the output never ran.
    try:
        sw = max(
            float(n.scale)
            for n in program.nodes.values()
            if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT)
            and n.type is not ValueType.INTEGER
        )
    except ValueError:
        sw = 0.0
    for leaf in program.outputs:
        if types[leaf.id] is ValueType.CIPHER and scales[leaf.id] >= sw + sf:
            out.append(
                Violation(
                    2,
                    leaf.id,
                    f"output scale 2^{scales[leaf.id]:g} not below "
                    f"waterline+cap 2^{sw + sf:g}",
                )
            )
    return out


def check_npoly(program: Program) -> list[Violation]:
    """C3: polynomial counts. Multiplication is only defined on
    2-polynomial ciphertexts; addition requires matching counts; outputs
    must be relinearized back to 2."""
    types = analysis.compute_types(program)
    npoly = analysis.compute_npoly(program, types)
    out: list[Violation] = []
    for n in program.nodes.values():
        if n.kind is not NodeKind.INSTRUCTION:
            continue
        if n.opcode is OpCode.MULTIPLY:
            for p in n.params:
                if types[p] is ValueType.CIPHER and npoly[p] != 2:
                    out.append(
                        Violation(3, n.id, f"multiply operand {p} has {npoly[p]} polynomials")
                    )
        elif n.opcode in (OpCode.ADD, OpCode.SUB):
            ks = [npoly[p] for p in n.params if types[p] is ValueType.CIPHER]
            if len(ks) == 2 and ks[0] != ks[1]:
                out.append(
                    Violation(3, n.id, f"operand polynomial counts differ: {ks[0]} vs {ks[1]}")
                )
    for leaf in program.outputs:
        if types[leaf.id] is ValueType.CIPHER and npoly[leaf.id] != 2:
            out.append(
                Violation(3, leaf.id, f"output carries {npoly[leaf.id]} polynomials")
            )
    return out


def check_all(program: Program, sf: float = 60.0) -> list[Violation]:
    return check_chains(program) + check_scales(program, sf) + check_npoly(program)
