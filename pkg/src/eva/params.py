"""Encryption parameter and rotation key selection for compiled programs.

The coefficient modulus is described by its bit-size vector: the 60-bit
special element consumed at encryption first, then the divisors of the
chosen output's rescale chain, then enough cap-sized factors to absorb the
output's final scale times its desired decode scale. r is the length of
that vector; logQ excludes the special element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import analysis
from .errors import CompileError
from .ir import OpCode, Program, resolve_chain


@dataclass
class CompilationResult:
    program: Program
    bit_sizes: list[int]
    rotation_steps: set[int] = field(default_factory=set)
    r: int = 0
    logQ: int = 0
    poly_degree: int = 0


def _output_requirements(program: Program, sf: float):
    """Per output leaf: (resolved chain, number of cap-sized factors,
    factor list)."""
    scales = analysis.compute_scales(program)
    chains = analysis.compute_chains(program).chains
    reqs = []
    for leaf in program.outputs:
        chain = chains[leaf.id]
        if chain is None:
            raise CompileError(
                [f"C1 node={leaf.id} output chain is non-conforming"]
            )
        resolved = resolve_chain(chain, sf)
        s_prime = scales[leaf.id] + float(leaf.scale)
        if s_prime <= 0:
            raise CompileError(
                [f"C2 node={leaf.id} combined output scale 2^{s_prime:g} below 1"]
            )
        nfactors = math.ceil(s_prime / sf)
        factors = [sf] * (nfactors - 1) + [s_prime - sf * (nfactors - 1)]
        if any(not float(f).is_integer() or f <= 0 for f in resolved + factors):
            raise CompileError(
                [f"C4 node={leaf.id} non-integral modulus factor in {resolved + factors}"]
            )
        reqs.append((leaf, resolved, nfactors, factors))
    return reqs


def select_parameters(program: Program, sf: float = 60.0) -> list[int]:
    """Bit-size vector for the most demanding output: special element,
    chain divisors, then the factorized output scale."""
    reqs = _output_requirements(program, sf)
    if not reqs:
        raise CompileError(["C2 node=-1 program has no outputs"])
    _leaf, chain, _nf, factors = max(reqs, key=lambda r: len(r[1]) + r[2])
    return [int(sf)] + [int(x) for x in chain] + [int(f) for f in factors]


def chain_length_formula(program: Program, sf: float = 60.0) -> int:
    """Closed-form r: the worst output's 1 + chain length + factor count.
    Checked against the constructive selection."""
    reqs = _output_requirements(program, sf)
    r = max(1 + len(chain) + nf for _leaf, chain, nf, _f in reqs)
    assert r == len(select_parameters(program, sf)), "parameter selection disagreement"
    return r


def select_rotation_steps(program: Program) -> set[int]:
    """Distinct left-rotation step counts; right rotations are normalized
    to their left equivalents modulo the vector size."""
    steps = set()
    for n in program.instructions:
        if n.opcode is OpCode.ROTATE_LEFT:
            steps.add(analysis.rotation_step(program, n) % program.vec_size)
        elif n.opcode is OpCode.ROTATE_RIGHT:
            steps.add((-analysis.rotation_step(program, n)) % program.vec_size)
    return steps


#: Reporting-only polynomial degree table: smallest degree whose modulus
#: budget covers logQ + the special element. Not a security certification.
_DEGREE_TABLE = [(109, 4096), (218, 8192), (438, 16384), (881, 32768)]


def poly_degree_for(logQ_with_special: int) -> int:
    for budget, degree in _DEGREE_TABLE:
        if logQ_with_special <= budget:
            return degree
    return 65536


def select(program: Program, sf: float = 60.0) -> CompilationResult:
    bit_sizes = select_parameters(program, sf)
    r = chain_length_formula(program, sf)
    logQ = sum(bit_sizes) - int(sf)
    return CompilationResult(
        program=program,
        bit_sizes=bit_sizes,
        rotation_steps=select_rotation_steps(program),
        r=r,
        logQ=logQ,
        poly_degree=poly_degree_for(logQ + int(sf)),
    )
