"""Residuals of a fixed linear model on encrypted data: y - (w*x + b)."""

from pyeva import Program, constant, input_encrypted, output

VEC_SIZE = 2048
SCALE = 30
W = 1.7
B = -0.35


def build() -> Program:
    program = Program(vec_size=VEC_SIZE)
    with program:
        x = input_encrypted(SCALE)
        y = input_encrypted(SCALE)
        prediction = x * constant(SCALE, W) + constant(SCALE, B)
        output(y - prediction, SCALE)
    return program
