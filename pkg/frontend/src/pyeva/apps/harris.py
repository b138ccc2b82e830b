"""Harris corner response over an encrypted 64x64 image packed row-major
into one 4096-slot vector: Sobel gradients, a 3x3-window structure
tensor, then det - 0.04 * trace^2."""

from pyeva import Program, constant, input_encrypted, output

SIZE = 64
SCALE = 30
KERNEL = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
K = 0.04


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
        ixx, iyy, ixy = ix * ix, iy * iy, ix * iy
        sxx = syy = sxy = None
        for i in range(3):
            for j in range(3):
                step = i * SIZE + j
                sxx = ixx << step if sxx is None else sxx + (ixx << step)
                syy = iyy << step if syy is None else syy + (iyy << step)
                sxy = ixy << step if sxy is None else sxy + (ixy << step)
        det = sxx * syy - sxy * sxy
        trace = sxx + syy
        response = det - (trace * trace) * constant(SCALE, K)
        output(response, SCALE)
    return program
