"""Independent scalar reference implementations for the application
corpus. Plain Python floats, explicit per-slot loops, wraparound window
indexing, and the same accumulation order as the recorded programs."""

from __future__ import annotations

KERNEL = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
SIZE = 64


def _sqrt_poly(x: float) -> float:
    return x * 2.214 + (x * x) * -1.098 + ((x * x) * x) * 0.173


def _gradients(image: list[float]) -> tuple[list[float], list[float]]:
    n = len(image)
    ix, iy = [], []
    for p in range(n):
        gx = gy = None
        for i in range(3):
            for j in range(3):
                r = image[(p + i * SIZE + j) % n]
                h = r * KERNEL[i][j]
                v = r * KERNEL[j][i]
                gx = h if gx is None else gx + h
                gy = v if gy is None else gy + v
        ix.append(gx)
        iy.append(gy)
    return ix, iy


def sobel(image: list[float]) -> list[float]:
    ix, iy = _gradients(image)
    return [_sqrt_poly(gx * gx + gy * gy) for gx, gy in zip(ix, iy)]


def harris(image: list[float], k: float = 0.04) -> list[float]:
    n = len(image)
    ix, iy = _gradients(image)
    ixx = [a * a for a in ix]
    iyy = [a * a for a in iy]
    ixy = [a * b for a, b in zip(ix, iy)]
    out = []
    for p in range(n):
        sxx = syy = sxy = None
        for i in range(3):
            for j in range(3):
                q = (p + i * SIZE + j) % n
                sxx = ixx[q] if sxx is None else sxx + ixx[q]
                syy = iyy[q] if syy is None else syy + iyy[q]
                sxy = ixy[q] if sxy is None else sxy + ixy[q]
        det = sxx * syy - sxy * sxy
        trace = sxx + syy
        out.append(det - (trace * trace) * k)
    return out


def path_length_3d(dx: list[float], dy: list[float], dz: list[float]) -> list[float]:
    n = len(dx)
    seg = [_sqrt_poly(a * a + b * b + c * c) for a, b, c in zip(dx, dy, dz)]
    total = seg
    step = 1
    while step < n:
        total = [t + total[(p + step) % n] for p, t in enumerate(total)]
        step *= 2
    return total


def linear_regression(x: list[float], y: list[float], w=1.7, b=-0.35) -> list[float]:
    return [yi - (xi * w + b) for xi, yi in zip(x, y)]


def polynomial_regression(x, y, coeffs=(0.5, -1.2, 0.8, 0.25)) -> list[float]:
    c0, c1, c2, c3 = coeffs
    return [
        yi - (c0 + xi * c1 + (xi * xi) * c2 + ((xi * xi) * xi) * c3)
        for xi, yi in zip(x, y)
    ]


def multivariate_regression(xs, y, weights=(0.9, -0.4, 1.3), b=0.1) -> list[float]:
    out = []
    for p, yi in enumerate(y):
        pred = b
        for x, w in zip(xs, weights):
            pred = pred + x[p] * w
        out.append(yi - pred)
    return out
