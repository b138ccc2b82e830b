"""Random valid input programs for property testing.

Programs use only input-legal opcodes, a uniform leaf scale and a single
output, which keeps every generated program compilable: with one leaf
scale, operand scale gaps at additions never exceed the rescale cap.
"""

from __future__ import annotations

import random
from typing import Optional

from .ir import NodeKind, OpCode, Program, ValueType

_OP_WEIGHTS = [
    (OpCode.MULTIPLY, 6),
    (OpCode.ADD, 5),
    (OpCode.SUB, 3),
    (OpCode.ROTATE_LEFT, 2),
    (OpCode.ROTATE_RIGHT, 2),
    (OpCode.NEGATE, 1),
    (OpCode.COPY, 1),
]


def generate_program(
    seed: int,
    n_insts: int = 8,
    vec_size: int = 8,
    n_inputs: int = 2,
    leaf_scale: float = 30.0,
    n_constants: int = 1,
    output_scale: Optional[float] = None,
) -> Program:
    """Deterministic random program with n_insts instructions and one
    cipher output."""
    rng = random.Random(seed)
    p = Program(vec_size)
    pool: list[int] = []  # operand candidates
    cipher: set[int] = set()
    for _ in range(max(1, n_inputs)):
        n = p.add_input(ValueType.CIPHER, leaf_scale)
        pool.append(n.id)
        cipher.add(n.id)
    for _ in range(n_constants):
        vals = [round(rng.uniform(-2.0, 2.0), 3) for _ in range(vec_size)]
        pool.append(p.add_constant(ValueType.VECTOR, leaf_scale, vals).id)

    ops = [op for op, w in _OP_WEIGHTS for _ in range(w)]
    last_cipher = None
    for _ in range(n_insts):
        op = rng.choice(ops)
        if op in (OpCode.ROTATE_LEFT, OpCode.ROTATE_RIGHT):
            src = rng.choice(sorted(cipher))
            step = p.add_constant(
                ValueType.INTEGER, 0.0, [float(rng.randrange(vec_size))]
            )
            n = p.add_instruction(op, [src, step.id])
        elif op in (OpCode.NEGATE, OpCode.COPY):
            n = p.add_instruction(op, [rng.choice(pool)])
        else:
            a, b = rng.choice(pool), rng.choice(pool)
            n = p.add_instruction(op, [a, b])
        srcs = [q for q in n.params if p.nodes[q].type is not ValueType.INTEGER]
        if any(s in cipher for s in srcs):
            cipher.add(n.id)
            last_cipher = n.id
        pool.append(n.id)
    out_src = last_cipher if last_cipher is not None else pool[-1]
    p.add_output(out_src, leaf_scale if output_scale is None else output_scale)
    return p


def random_inputs(program: Program, seed: int) -> dict[int, list[float]]:
    """Values in [-1, 1] for every program input, deterministic per seed."""
    rng = random.Random(seed)
    return {
        n.id: [round(rng.uniform(-1.0, 1.0), 6) for _ in range(program.vec_size)]
        for n in program.inputs
    }
