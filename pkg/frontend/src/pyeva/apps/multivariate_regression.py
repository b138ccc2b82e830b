"""Residuals of a fixed three-feature linear model on encrypted data:
y - (w1*x1 + w2*x2 + w3*x3 + b)."""

from pyeva import Program, constant, input_encrypted, output

VEC_SIZE = 2048
SCALE = 30
WEIGHTS = [0.9, -0.4, 1.3]
B = 0.1


def build() -> Program:
    program = Program(vec_size=VEC_SIZE)
    with program:
        xs = [input_encrypted(SCALE) for _ in WEIGHTS]
        y = input_encrypted(SCALE)
        prediction = constant(SCALE, B)
        for x, w in zip(xs, WEIGHTS):
            prediction = prediction + x * constant(SCALE, w)
        output(y - prediction, SCALE)
    return program
