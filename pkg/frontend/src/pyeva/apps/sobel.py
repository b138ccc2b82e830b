"""Sobel edge detection over an encrypted 64x64 image packed row-major
into one 4096-slot vector; window reads wrap around the vector."""

from pyeva import Program, constant, input_encrypted, output

SIZE = 64
SCALE = 30
KERNEL = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]


def sqrt(x):
    """3rd degree polynomial approximation of square root."""
    return (
        x * constant(SCALE, 2.214)
        + (x**2) * constant(SCALE, -1.098)
        + (x**3) * constant(SCALE, 0.173)
    )


def build() -> Program:
    program = Program(vec_size=SIZE * SIZE)
    with program:
        image = input_encrypted(SCALE)
        ix = iy = None
        for i in range(3):
            for j in range(3):
                rot = image << (i * SIZE + j)
                h = rot * constant(SCALE, KERNEL[i][j])
                v = rot * constant(SCALE, KERNEL[j][i])
                ix = h if ix is None else ix + h
                iy = v if iy is None else iy + v
        d = sqrt(ix**2 + iy**2)
        output(d, SCALE)
    return program
