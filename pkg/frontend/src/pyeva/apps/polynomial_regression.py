"""Residuals of a fixed cubic model on encrypted data:
y - (c0 + c1*x + c2*x^2 + c3*x^3)."""

from pyeva import Program, constant, input_encrypted, output

VEC_SIZE = 4096
SCALE = 30
COEFFS = [0.5, -1.2, 0.8, 0.25]


def build() -> Program:
    program = Program(vec_size=VEC_SIZE)
    with program:
        x = input_encrypted(SCALE)
        y = input_encrypted(SCALE)
        prediction = (
            constant(SCALE, COEFFS[0])
            + x * constant(SCALE, COEFFS[1])
            + (x**2) * constant(SCALE, COEFFS[2])
            + (x**3) * constant(SCALE, COEFFS[3])
        )
        output(y - prediction, SCALE)
    return program
