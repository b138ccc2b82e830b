"""Length of an encrypted 3-dimensional path: per-segment Euclidean
length via a polynomial square-root approximation, then a rotate-and-add
reduction leaving the total path length in every slot."""

from pyeva import Program, constant, input_encrypted, output

VEC_SIZE = 4096
SCALE = 30


def sqrt(x):
    """3rd degree polynomial approximation of square root."""
    return (
        x * constant(SCALE, 2.214)
        + (x**2) * constant(SCALE, -1.098)
        + (x**3) * constant(SCALE, 0.173)
    )


def build() -> Program:
    program = Program(vec_size=VEC_SIZE)
    with program:
        dx = input_encrypted(SCALE)
        dy = input_encrypted(SCALE)
        dz = input_encrypted(SCALE)
        seg = sqrt(dx * dx + dy * dy + dz * dz)
        total = seg
        step = 1
        while step < VEC_SIZE:
            total = total + (total << step)
            step *= 2
        output(total, SCALE)
    return program
